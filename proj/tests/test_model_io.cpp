#include "doctest.h"
#include "test_util.hpp"

#include <cstring>
#include <filesystem>
#include <sstream>

#include "jacprop/errors.hpp"
#include "jacprop/matrix_text.hpp"
#include "jacprop/model_io.hpp"

using namespace jacprop;

namespace {

Network sample_network(std::uint64_t seed) {
  NetworkShape shape;
  shape.widths = {3, 4, 2};
  shape.hidden_activations = {ActivationKind::Sigmoid};
  shape.head = HeadKind::SoftmaxCE;
  Rng rng(seed);
  return init_network(shape, rng);
}

std::string bytes_of(const Network& net) {
  std::ostringstream out(std::ios::binary);
  save_model(net, out);
  return out.str();
}

std::uint32_t u32_at(const std::string& s, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[off + i]);
  return v;
}

}  // namespace

TEST_CASE("model container round trips bit for bit") {
  const Network net = sample_network(1);
  const std::string bytes = bytes_of(net);
  std::istringstream in(bytes, std::ios::binary);
  const Network back = load_model(in);
  CHECK(back.shape() == net.shape());
  CHECK(param_pack(back).theta == param_pack(net).theta);
  CHECK(bytes_of(back) == bytes);
}

TEST_CASE("container header layout") {
  const Network net = sample_network(2);
  const std::string bytes = bytes_of(net);
  CHECK(bytes.substr(0, 4) == "JPNN");
  CHECK(u32_at(bytes, 4) == kModelVersion);
  CHECK(u32_at(bytes, 8) == 2);   // layers
  CHECK(u32_at(bytes, 12) == 1);  // softmax_ce
  // header 16 + 2 layer records of 20 bytes + theta
  CHECK(bytes.size() == 16 + 2 * 20 + 8 * net.param_count());
  // theta follows the layer records in little-endian order
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 56, sizeof first);
  CHECK(first == param_pack(net).theta[0]);
}

TEST_CASE("malformed containers are rejected") {
  const std::string bytes = bytes_of(sample_network(3));
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(load_model(in), FormatError);
  }
  {
    std::istringstream in(bytes.substr(0, bytes.size() - 3), std::ios::binary);
    CHECK_THROWS_AS(load_model(in), FormatError);
  }
  {
    std::istringstream in(bytes + "x", std::ios::binary);
    CHECK_THROWS_AS(load_model(in), FormatError);
  }
  {
    std::string bad = bytes;
    bad[4] = 9;
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(load_model(in), FormatError);
  }
}

TEST_CASE("model files") {
  const auto path = std::filesystem::temp_directory_path() / "jacprop_model_io_test.bin";
  const Network net = sample_network(4);
  save_model_file(net, path.string());
  CHECK(param_pack(load_model_file(path.string())).theta == param_pack(net).theta);
  std::filesystem::remove(path);
  CHECK_THROWS(load_model_file(path.string()));
}

TEST_CASE("matrix text format") {
  std::istringstream in("# kernels\n1 2\n3 4\n\n\n5 6 7\n");
  const std::vector<DenseMatrix> ms = read_matrices(in, "inline");
  REQUIRE(ms.size() == 2);
  CHECK(ms[0] == DenseMatrix::from_rows({{1, 2}, {3, 4}}));
  CHECK(ms[1] == DenseMatrix::from_rows({{5, 6, 7}}));

  std::istringstream ragged("1 2\n3\n");
  CHECK_THROWS_AS(read_matrices(ragged, "inline"), FormatError);
  std::istringstream junk("1 two\n");
  CHECK_THROWS_AS(read_matrices(junk, "inline"), FormatError);

  const DenseMatrix m = DenseMatrix::from_rows({{0.1, -1e-300}, {1.0 / 3.0, 2}});
  std::ostringstream out;
  write_matrix(out, m);
  std::istringstream back(out.str());
  CHECK(read_matrices(back, "roundtrip").at(0) == m);
}
