#pragma once

#include <cstddef>
#include <optional>

#include "jacprop/activations.hpp"
#include "jacprop/numkernel.hpp"

namespace jacprop {

/// Fully-connected layer with z = W^T x + b, W of shape n_in x n_out.
///
/// Hidden layers carry an elementwise activation. The last layer of a network
/// carries none: its nonlinearity belongs to the head.
class DenseLayer {
 public:
  DenseLayer(DenseMatrix weights, DenseVector bias, std::optional<ActivationKind> activation);

  std::size_t n_in() const noexcept { return weights_.rows(); }
  std::size_t n_out() const noexcept { return weights_.cols(); }
  /// n_in * n_out + n_out.
  std::size_t param_count() const noexcept { return weights_.size() + bias_.size(); }

  const DenseMatrix& weights() const noexcept { return weights_; }
  const DenseVector& bias() const noexcept { return bias_; }
  std::optional<ActivationKind> activation() const noexcept { return activation_; }

 private:
  DenseMatrix weights_;
  DenseVector bias_;
  std::optional<ActivationKind> activation_;
};

struct LayerOutput {
  DenseVector z;
  DenseVector a;
};

LayerOutput dense_forward(const DenseLayer& layer, const DenseVector& input);

/// Jacobian of z = W^T a_prev + b with respect to [vec_columns(W); b].
///
/// Logical shape out_dim x (n_in * out_dim + out_dim); row i is a_prev^T placed
/// in column block i followed by the i-th unit row of the identity. Only the
/// input vector is stored.
class LocalJacobian {
 public:
  LocalJacobian(DenseVector a_prev, std::size_t out_dim);

  const DenseVector& a_prev() const noexcept { return a_prev_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  std::size_t rows() const noexcept { return out_dim_; }
  std::size_t cols() const noexcept { return a_prev_.size() * out_dim_ + out_dim_; }

 private:
  DenseVector a_prev_;
  std::size_t out_dim_;
};

LocalJacobian local_param_jacobian(DenseVector a_prev, std::size_t out_dim);
DenseMatrix materialize_local_jacobian(const LocalJacobian& j);

/// J^T v = [vec_columns(a_prev v^T); v] without forming J.
DenseVector apply_local_jacobian_transpose(const LocalJacobian& j, const DenseVector& v);

}  // namespace jacprop
