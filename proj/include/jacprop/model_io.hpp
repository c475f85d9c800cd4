#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "jacprop/network.hpp"

namespace jacprop {

// Binary model container; byte layout in docs/formats.md.
inline constexpr char kModelMagic[4] = {'J', 'P', 'N', 'N'};
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(const Network& network, std::ostream& out);
Network load_model(std::istream& in);

void save_model_file(const Network& network, const std::string& path);
Network load_model_file(const std::string& path);

}  // namespace jacprop
