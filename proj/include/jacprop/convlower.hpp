#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "jacprop/layers.hpp"
#include "jacprop/numkernel.hpp"

namespace jacprop {

// Single-channel 2-D convolution, stride 1, no padding (valid). "Convolution"
// here is the sliding-window correlation out(i, j) = sum X(i+p, j+q) K(p, q).
// Images are vectorized row-major (vec_rows) everywhere in this module.

struct ImageShape {
  std::size_t rows;
  std::size_t cols;
};

DenseMatrix conv2d_direct(const DenseMatrix& x, const DenseMatrix& kernel);

/// Teop(K): (out_rows * out_cols) x (rows * cols) with
/// Teop(K) * vec_rows(X) == vec_rows(conv2d_direct(X, K)).
DenseMatrix toeplitz_of_kernel(const DenseMatrix& kernel, ImageShape input);

/// One convolutional layer: r filters, each with an output-shaped bias matrix.
struct ConvSpec {
  ImageShape input;
  std::vector<DenseMatrix> kernels;
  /// Empty means zero biases; otherwise one per kernel.
  std::vector<DenseMatrix> biases;

  ImageShape output() const;
  void validate() const;
};

struct LoweredFilter {
  DenseMatrix weights;  // Teop(K_i)^T, (rows * cols) x #outputs
  DenseVector bias;     // vec_rows(B_i)
};

/// Per-filter dense equivalents: weights^T vec_rows(X) + bias == vec_rows(X * K_i + B_i).
std::vector<LoweredFilter> conv_layer_to_dense(const ConvSpec& spec);

/// All filters as one DenseLayer, filter i occupying output columns
/// [i * #outputs, (i + 1) * #outputs).
DenseLayer lower_conv_layer(const ConvSpec& spec, std::optional<ActivationKind> activation);

}  // namespace jacprop
