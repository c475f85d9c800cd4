#include "jacprop/layers.hpp"

#include <string>

#include "jacprop/errors.hpp"

namespace jacprop {

DenseLayer::DenseLayer(DenseMatrix weights, DenseVector bias,
                       std::optional<ActivationKind> activation)
    : weights_(std::move(weights)), bias_(std::move(bias)), activation_(activation) {
  if (bias_.size() != weights_.cols()) {
    throw DimensionError("DenseLayer: bias length " + std::to_string(bias_.size()) +
                         " vs weight columns " + std::to_string(weights_.cols()));
  }
  if (weights_.empty()) throw DimensionError("DenseLayer: empty weight matrix");
  if (activation_ && !is_elementwise(*activation_)) {
    throw InvalidHeadError("DenseLayer: softmax is only available as a head");
  }
  if (!all_finite(weights_.span()) || !all_finite(bias_.span())) {
    throw Error("DenseLayer: non-finite parameters");
  }
}

LayerOutput dense_forward(const DenseLayer& layer, const DenseVector& input) {
  if (input.size() != layer.n_in()) {
    throw DimensionError("dense_forward: input length " + std::to_string(input.size()) +
                         " vs layer n_in " + std::to_string(layer.n_in()));
  }
  DenseVector z = add(transpose_matvec(layer.weights(), input), layer.bias());
  DenseVector a = layer.activation() ? apply_activation(*layer.activation(), z) : z;
  return {std::move(z), std::move(a)};
}

LocalJacobian::LocalJacobian(DenseVector a_prev, std::size_t out_dim)
    : a_prev_(std::move(a_prev)), out_dim_(out_dim) {
  if (a_prev_.empty() || out_dim_ == 0) {
    throw DimensionError("LocalJacobian: empty input or zero output dimension");
  }
}

LocalJacobian local_param_jacobian(DenseVector a_prev, std::size_t out_dim) {
  return LocalJacobian(std::move(a_prev), out_dim);
}

DenseMatrix materialize_local_jacobian(const LocalJacobian& j) {
  const std::size_t n_in = j.a_prev().size();
  const std::size_t weight_cols = n_in * j.out_dim();
  DenseMatrix m(j.rows(), j.cols());
  for (std::size_t i = 0; i < j.out_dim(); ++i) {
    for (std::size_t k = 0; k < n_in; ++k) m(i, i * n_in + k) = j.a_prev()[k];
    m(i, weight_cols + i) = 1.0;
  }
  return m;
}

DenseVector apply_local_jacobian_transpose(const LocalJacobian& j, const DenseVector& v) {
  if (v.size() != j.out_dim()) {
    throw DimensionError("apply_local_jacobian_transpose: vector length " +
                         std::to_string(v.size()) + " vs out_dim " + std::to_string(j.out_dim()));
  }
  const std::size_t n_in = j.a_prev().size();
  DenseVector g(j.cols());
  for (std::size_t col = 0; col < j.out_dim(); ++col) {
    const double vc = v[col];
    for (std::size_t k = 0; k < n_in; ++k) g[col * n_in + k] = j.a_prev()[k] * vc;
  }
  const std::size_t bias_offset = n_in * j.out_dim();
  for (std::size_t i = 0; i < j.out_dim(); ++i) g[bias_offset + i] = v[i];
  return g;
}

}  // namespace jacprop
