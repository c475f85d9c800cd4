#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <numeric>

#include "jacprop/activations.hpp"
#include "jacprop/errors.hpp"

using namespace jacprop;

TEST_CASE("apply_activation examples") {
  CHECK(apply_activation(ActivationKind::Sigmoid, DenseVector{0})[0] == 0.5);
  const DenseVector sm = apply_activation(ActivationKind::Softmax, DenseVector{0, 0, 0});
  for (double v : sm) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(apply_activation(ActivationKind::ReLU, DenseVector{-1, 2, 0}) == DenseVector{0, 2, 0});
  CHECK(apply_activation(ActivationKind::Identity, DenseVector{-1, 2}) == DenseVector{-1, 2});
}

TEST_CASE("softmax rejects a single logit") {
  CHECK_THROWS_AS(apply_activation(ActivationKind::Softmax, DenseVector{1.0}), InvalidHeadError);
}

TEST_CASE("sigmoid and softmax stay finite and in range for extreme inputs") {
  const DenseVector z{-800, -30, 0, 30, 800};
  for (double v : apply_activation(ActivationKind::Sigmoid, z)) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  const DenseVector sm = apply_activation(ActivationKind::Softmax, DenseVector{1000, 999, -1000});
  CHECK(std::isfinite(sm[0]));
  CHECK(std::accumulate(sm.begin(), sm.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax outputs sum to one") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseVector z = jacprop::testing::random_vector(2 + rng.below(9), rng);
    const DenseVector p = apply_activation(ActivationKind::Softmax, scale(z, 5.0));
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    CHECK(std::abs(total - 1.0) <= 1e-12);
    for (double v : p) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("activation_jacobian_diag examples") {
  CHECK(activation_jacobian_diag(ActivationKind::ReLU, DenseVector{-1, 2, 0}) ==
        DenseVector{0, 1, 0});
  CHECK(activation_jacobian_diag(ActivationKind::Identity, DenseVector{3, -2, 0, 9}) ==
        DenseVector{1, 1, 1, 1});
  CHECK(activation_jacobian_diag(ActivationKind::Sigmoid, DenseVector{0})[0] == 0.25);
  CHECK_THROWS_AS(activation_jacobian_diag(ActivationKind::Softmax, DenseVector{0, 0}),
                  UnsupportedError);
}

TEST_CASE("activation_jacobian_diag matches central differences") {
  Rng rng(17);
  const double h = 1e-6;
  for (ActivationKind kind :
       {ActivationKind::ReLU, ActivationKind::Sigmoid, ActivationKind::Identity}) {
    for (int trial = 0; trial < 200; ++trial) {
      const DenseVector z = scale(jacprop::testing::random_vector(1 + rng.below(10), rng), 4.0);
      const DenseVector d = activation_jacobian_diag(kind, z);
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (kind == ActivationKind::ReLU && std::abs(z[i]) < 1e-4) continue;
        DenseVector up = z, down = z;
        up[i] += h;
        down[i] -= h;
        const double fd = (apply_activation(kind, up)[i] - apply_activation(kind, down)[i]) /
                          (up[i] - down[i]);
        CHECK(std::abs(fd - d[i]) <= 1e-7);
      }
    }
  }
}

TEST_CASE("a ReLU diagonal zeroes exactly the rows of inactive units") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    const DenseVector z = jacprop::testing::random_vector(d, rng);
    const DenseMatrix w = jacprop::testing::random_matrix(d, 1 + rng.below(5), rng);
    const DenseVector mask = activation_jacobian_diag(ActivationKind::ReLU, z);
    const DenseMatrix pruned = matmul(diag(mask), w);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) {
        if (z[i] <= 0.0) {
          CHECK(pruned(i, j) == 0.0);
        } else {
          CHECK(pruned(i, j) == w(i, j));
        }
      }
    }
    // sigmoid diagonal is plain row scaling
    const DenseVector s = activation_jacobian_diag(ActivationKind::Sigmoid, z);
    const DenseMatrix scaled = matmul(diag(s), w);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) CHECK(scaled(i, j) == s[i] * w(i, j));
    }
  }
}

TEST_CASE("activation names round trip") {
  for (ActivationKind kind : {ActivationKind::ReLU, ActivationKind::Sigmoid,
                              ActivationKind::Identity, ActivationKind::Softmax}) {
    CHECK(parse_activation(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_activation("tanh"), std::invalid_argument);
}
