#include "jacprop/matrix_text.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jacprop/errors.hpp"

namespace jacprop {

std::vector<DenseMatrix> read_matrices(std::istream& in, const std::string& source) {
  std::vector<DenseMatrix> out;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  const auto flush = [&] {
    if (rows > 0) out.emplace_back(rows, cols, std::move(values));
    values.clear();
    rows = 0;
    cols = 0;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw FormatError(source + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) {
      flush();
      continue;
    }
    if (rows > 0 && row.size() != cols) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(cols) + " entries, found " + std::to_string(row.size()));
    }
    cols = row.size();
    ++rows;
    values.insert(values.end(), row.begin(), row.end());
  }
  flush();
  return out;
}

std::vector<DenseMatrix> read_matrices_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_matrices(in, path);
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << (j == 0 ? "" : " ") << buf;
    }
    out << '\n';
  }
}

}  // namespace jacprop
