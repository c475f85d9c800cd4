#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jacprop/numkernel.hpp"

namespace jacprop {

/// Plain-text matrices: one row per line, entries separated by whitespace,
/// consecutive matrices separated by one or more blank lines, '#' starts a
/// comment. Ragged rows or unparsable entries raise FormatError with the line.
std::vector<DenseMatrix> read_matrices(std::istream& in, const std::string& source);
std::vector<DenseMatrix> read_matrices_file(const std::string& path);

void write_matrix(std::ostream& out, const DenseMatrix& m);

}  // namespace jacprop
