#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jacprop/activations.hpp"
#include "jacprop/layers.hpp"
#include "jacprop/losses.hpp"
#include "jacprop/numkernel.hpp"
#include "jacprop/rng.hpp"

namespace jacprop {

/// Largest parameter count the dense reference path will materialize.
inline constexpr std::size_t kReferenceParamCap = 20000;

/// Architecture without parameter values.
struct NetworkShape {
  /// n_0 (input dimension), n_1, ..., n_L.
  std::vector<std::size_t> widths;
  /// Activations of layers 1..L-1; layer L feeds the head.
  std::vector<ActivationKind> hidden_activations;
  HeadKind head = HeadKind::IdentitySE;

  std::size_t layer_count() const noexcept { return widths.empty() ? 0 : widths.size() - 1; }
  std::size_t param_count() const;
  /// Throws DimensionError / InvalidHeadError on an inconsistent shape.
  void validate() const;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct LayerSlot {
  std::size_t offset_w;
  std::size_t offset_b;
  std::size_t n_in;
  std::size_t n_out;

  friend bool operator==(const LayerSlot&, const LayerSlot&) = default;
};

/// Position of each layer's block in theta = [vec(W1); b1; vec(W2); b2; ...].
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::span<const std::size_t> widths);

  const std::vector<LayerSlot>& slots() const noexcept { return slots_; }
  std::size_t total() const noexcept { return total_; }

  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;

 private:
  std::vector<LayerSlot> slots_;
  std::size_t total_ = 0;
};

struct ParamVector {
  DenseVector theta;
  ParamLayout layout;
};

/// Chain of dense layers followed by a head.
class Network {
 public:
  Network(std::vector<DenseLayer> layers, HeadKind head);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  HeadKind head() const noexcept { return head_; }
  std::size_t input_dim() const { return layers_.front().n_in(); }
  std::size_t output_dim() const { return layers_.back().n_out(); }
  std::size_t param_count() const;
  NetworkShape shape() const;

 private:
  std::vector<DenseLayer> layers_;
  HeadKind head_;
};

/// Weights and biases uniform on [-1/sqrt(n_in), 1/sqrt(n_in)], drawn layer by
/// layer in theta order.
Network init_network(const NetworkShape& shape, Rng& rng);

ParamVector param_pack(const Network& network);
Network param_unpack(const NetworkShape& shape, const DenseVector& theta);
Network param_unpack(const NetworkShape& shape, const ParamVector& params);

/// Per-layer values of one forward pass; index l holds layer l+1.
struct ForwardTrace {
  DenseVector x;
  std::vector<DenseVector> z;
  std::vector<DenseVector> a;
  DenseVector yhat;

  /// a^[l-1] for 0-based layer index l, with a^[0] = x.
  const DenseVector& layer_input(std::size_t l) const { return l == 0 ? x : a[l - 1]; }
};

ForwardTrace forward(const Network& network, const DenseVector& x);

struct GradResult {
  DenseVector grad;
  double loss = 0.0;
  DenseVector yhat;
};

/// Backward vectors delta^[l] for every layer, given delta^[L].
///
/// delta^[l] = diag(f'(z^[l])) W^[l+1] delta^[l+1]. Rows whose activation
/// derivative is zero (inactive ReLU units) are skipped outright, which is the
/// row pruning a 0/1 diagonal performs on W^[l+1].
std::vector<DenseVector> backward_deltas(const Network& network, const ForwardTrace& trace,
                                         DenseVector delta_last);

/// Stacks J_local(a^[l-1])^T delta^[l] for l = 1..L into one theta-ordered vector.
DenseVector assemble_gradient(const Network& network, const ForwardTrace& trace,
                              std::span<const DenseVector> deltas);

/// Structured backpropagation (vector-Jacobian products, right to left).
GradResult backprop(const Network& network, const DenseVector& x, const Target& y);

/// J_theta z^[L] materialized: one n_L x |theta| matrix built from dense
/// per-layer blocks chain_l * [blockdiag(a^T) | I]. Throws
/// ReferenceTooLargeError above param_cap.
DenseMatrix param_jacobian_dense(const Network& network, const ForwardTrace& trace,
                                 std::size_t param_cap = kReferenceParamCap);

/// Gradient as (J_theta z^[L])^T grad_z_last with every Jacobian materialized.
GradResult backprop_dense_reference(const Network& network, const DenseVector& x,
                                    const Target& y,
                                    std::size_t param_cap = kReferenceParamCap);

/// Loss as a pure function of theta; the function finite differences differentiate.
double loss_of_params(const NetworkShape& shape, const DenseVector& theta, const DenseVector& x,
                      const Target& y);

}  // namespace jacprop
