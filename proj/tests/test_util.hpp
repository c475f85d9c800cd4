#pragma once

#include <cmath>
#include <cstddef>

#include "doctest.h"

#include "jacprop/gradcheck.hpp"
#include "jacprop/network.hpp"
#include "jacprop/rng.hpp"

namespace jacprop::testing {

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.span()) v = rng.uniform(-1.0, 1.0);
  return m;
}

inline DenseVector random_vector(std::size_t n, Rng& rng) { return random_input(n, rng); }

/// Depth in [1, max_layers], widths in [1, max_width], final width fitted to the head.
inline NetworkShape random_shape(Rng& rng, HeadKind head, std::size_t max_layers = 3,
                                 std::size_t max_width = 6) {
  static constexpr ActivationKind kHidden[] = {ActivationKind::ReLU, ActivationKind::Sigmoid,
                                               ActivationKind::Identity};
  NetworkShape shape;
  shape.head = head;
  const std::size_t layers = 1 + rng.below(max_layers);
  shape.widths.push_back(1 + rng.below(max_width));
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t w = 1 + rng.below(max_width);
    if (l + 1 == layers) {
      if (head == HeadKind::SigmoidBCE) w = 1;
      if (head == HeadKind::SoftmaxCE) w = 2 + rng.below(max_width - 1);
    } else {
      shape.hidden_activations.push_back(kHidden[rng.below(3)]);
    }
    shape.widths.push_back(w);
  }
  return shape;
}

/// Uniform input resampled until no ReLU pre-activation is within 1e-4 of 0.
inline DenseVector kink_free_input(const Network& network, Rng& rng) {
  DenseVector x = random_input(network.input_dim(), rng);
  while (near_relu_kink(network, x)) x = random_input(network.input_dim(), rng);
  return x;
}

inline void check_near(const DenseVector& a, const DenseVector& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO("index " << i << ": " << a[i] << " vs " << b[i]);
    CHECK(std::abs(a[i] - b[i]) <= tol);
  }
}

inline void check_near(const DenseMatrix& a, const DenseMatrix& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      INFO("(" << i << "," << j << "): " << a(i, j) << " vs " << b(i, j));
      CHECK(std::abs(a(i, j) - b(i, j)) <= tol);
    }
  }
}

}  // namespace jacprop::testing
