#include "jacprop/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "jacprop/errors.hpp"

namespace jacprop {

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(T)];
  const auto offset = in.tellg();
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw FormatError(std::string("model container truncated reading ") + what + " at byte " +
                      std::to_string(static_cast<long long>(offset)));
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::uint32_t head_tag(HeadKind head) {
  switch (head) {
    case HeadKind::SigmoidBCE: return 0;
    case HeadKind::SoftmaxCE: return 1;
    case HeadKind::IdentitySE: return 2;
  }
  return 0;
}

HeadKind head_from_tag(std::uint32_t tag) {
  switch (tag) {
    case 0: return HeadKind::SigmoidBCE;
    case 1: return HeadKind::SoftmaxCE;
    case 2: return HeadKind::IdentitySE;
    default: throw FormatError("model container: unknown head tag " + std::to_string(tag));
  }
}

std::uint32_t activation_tag(std::optional<ActivationKind> act) {
  if (!act) return 0;
  switch (*act) {
    case ActivationKind::ReLU: return 1;
    case ActivationKind::Sigmoid: return 2;
    case ActivationKind::Identity: return 3;
    case ActivationKind::Softmax: break;
  }
  throw FormatError("model container: softmax cannot be a layer activation");
}

std::optional<ActivationKind> activation_from_tag(std::uint32_t tag) {
  switch (tag) {
    case 0: return std::nullopt;
    case 1: return ActivationKind::ReLU;
    case 2: return ActivationKind::Sigmoid;
    case 3: return ActivationKind::Identity;
    default: throw FormatError("model container: unknown activation tag " + std::to_string(tag));
  }
}

}  // namespace

void save_model(const Network& network, std::ostream& out) {
  out.write(kModelMagic, sizeof(kModelMagic));
  write_le<std::uint32_t>(out, kModelVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(network.layer_count()));
  write_le<std::uint32_t>(out, head_tag(network.head()));
  for (const DenseLayer& layer : network.layers()) {
    write_le<std::uint64_t>(out, layer.n_in());
    write_le<std::uint64_t>(out, layer.n_out());
    write_le<std::uint32_t>(out, activation_tag(layer.activation()));
  }
  for (double v : param_pack(network).theta) write_le<double>(out, v);
  if (!out) throw FormatError("model container: write failed");
}

Network load_model(std::istream& in) {
  char magic[sizeof(kModelMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw FormatError("model container: bad magic");
  }
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kModelVersion) {
    throw FormatError("model container: unsupported version " + std::to_string(version));
  }
  const auto layer_count = read_le<std::uint32_t>(in, "layer count");
  if (layer_count == 0) throw FormatError("model container: zero layers");
  const HeadKind head = head_from_tag(read_le<std::uint32_t>(in, "head tag"));

  NetworkShape shape;
  shape.head = head;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const auto n_in = read_le<std::uint64_t>(in, "layer n_in");
    const auto n_out = read_le<std::uint64_t>(in, "layer n_out");
    const auto act = activation_from_tag(read_le<std::uint32_t>(in, "activation tag"));
    if (l == 0) {
      shape.widths.push_back(n_in);
    } else if (shape.widths.back() != n_in) {
      throw FormatError("model container: layer " + std::to_string(l + 1) +
                        " input does not chain");
    }
    shape.widths.push_back(n_out);
    const bool last = l + 1 == layer_count;
    if (last != !act.has_value()) {
      throw FormatError("model container: only the last layer may omit its activation");
    }
    if (act) shape.hidden_activations.push_back(*act);
  }
  try {
    shape.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("model container: ") + e.what());
  }
  DenseVector theta(shape.param_count());
  for (double& v : theta) v = read_le<double>(in, "parameters");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("model container: trailing bytes after parameters");
  }
  return param_unpack(shape, theta);
}

void save_model_file(const Network& network, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  save_model(network, out);
}

Network load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return load_model(in);
}

}  // namespace jacprop
