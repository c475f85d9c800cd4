#include "jacprop/network.hpp"

#include <cmath>
#include <string>

#include "jacprop/errors.hpp"

namespace jacprop {

namespace {

void check_head_width(HeadKind head, std::size_t out_dim) {
  if (head == HeadKind::SigmoidBCE && out_dim != 1) {
    throw DimensionError("sigmoid_bce head needs a final width of 1, got " +
                         std::to_string(out_dim));
  }
  if (head == HeadKind::SoftmaxCE && out_dim < 2) {
    throw DimensionError("softmax_ce head needs a final width of at least 2, got " +
                         std::to_string(out_dim));
  }
}

}  // namespace

std::size_t NetworkShape::param_count() const {
  std::size_t total = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) total += widths[l - 1] * widths[l] + widths[l];
  return total;
}

void NetworkShape::validate() const {
  if (widths.size() < 2) throw DimensionError("network shape needs at least one layer");
  for (std::size_t w : widths) {
    if (w == 0) throw DimensionError("network shape has a zero width");
  }
  if (hidden_activations.size() != widths.size() - 2) {
    throw DimensionError("network shape: " + std::to_string(layer_count()) + " layers need " +
                         std::to_string(widths.size() - 2) + " hidden activations, got " +
                         std::to_string(hidden_activations.size()));
  }
  for (ActivationKind kind : hidden_activations) {
    if (!is_elementwise(kind)) throw InvalidHeadError("softmax is only available as a head");
  }
  check_head_width(head, widths.back());
}

ParamLayout::ParamLayout(std::span<const std::size_t> widths) {
  std::size_t offset = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    LayerSlot slot{offset, offset + widths[l - 1] * widths[l], widths[l - 1], widths[l]};
    offset = slot.offset_b + widths[l];
    slots_.push_back(slot);
  }
  total_ = offset;
}

Network::Network(std::vector<DenseLayer> layers, HeadKind head)
    : layers_(std::move(layers)), head_(head) {
  if (layers_.empty()) throw DimensionError("Network: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const bool last = l + 1 == layers_.size();
    if (last && layers_[l].activation()) {
      throw InvalidHeadError("Network: the last layer's activation is the head's; pass none");
    }
    if (!last && !layers_[l].activation()) {
      throw InvalidHeadError("Network: hidden layer " + std::to_string(l + 1) +
                             " has no activation");
    }
    if (!last && layers_[l].n_out() != layers_[l + 1].n_in()) {
      throw DimensionError("Network: layer " + std::to_string(l + 1) + " outputs " +
                           std::to_string(layers_[l].n_out()) + " but layer " +
                           std::to_string(l + 2) + " takes " +
                           std::to_string(layers_[l + 1].n_in()));
    }
  }
  check_head_width(head_, layers_.back().n_out());
}

std::size_t Network::param_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer.param_count();
  return total;
}

NetworkShape Network::shape() const {
  NetworkShape s;
  s.head = head_;
  s.widths.push_back(layers_.front().n_in());
  for (const auto& layer : layers_) {
    s.widths.push_back(layer.n_out());
    if (layer.activation()) s.hidden_activations.push_back(*layer.activation());
  }
  return s;
}

Network init_network(const NetworkShape& shape, Rng& rng) {
  shape.validate();
  std::vector<DenseLayer> layers;
  for (std::size_t l = 1; l < shape.widths.size(); ++l) {
    const std::size_t n_in = shape.widths[l - 1];
    const std::size_t n_out = shape.widths[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
    DenseVector w(n_in * n_out);
    for (double& v : w) v = rng.uniform(-bound, bound);
    DenseVector b(n_out);
    for (double& v : b) v = rng.uniform(-bound, bound);
    std::optional<ActivationKind> act;
    if (l + 1 < shape.widths.size()) act = shape.hidden_activations[l - 1];
    layers.emplace_back(unvec(w, n_in, n_out), std::move(b), act);
  }
  return Network(std::move(layers), shape.head);
}

ParamVector param_pack(const Network& network) {
  const NetworkShape shape = network.shape();
  ParamVector out{DenseVector(network.param_count()), ParamLayout(shape.widths)};
  for (std::size_t l = 0; l < network.layer_count(); ++l) {
    const LayerSlot& slot = out.layout.slots()[l];
    const DenseVector w = vec_columns(network.layer(l).weights());
    for (std::size_t i = 0; i < w.size(); ++i) out.theta[slot.offset_w + i] = w[i];
    const DenseVector& b = network.layer(l).bias();
    for (std::size_t i = 0; i < b.size(); ++i) out.theta[slot.offset_b + i] = b[i];
  }
  return out;
}

Network param_unpack(const NetworkShape& shape, const DenseVector& theta) {
  shape.validate();
  const ParamLayout layout(shape.widths);
  if (theta.size() != layout.total()) {
    throw DimensionError("param_unpack: theta length " + std::to_string(theta.size()) +
                         " vs layout " + std::to_string(layout.total()));
  }
  std::vector<DenseLayer> layers;
  layers.reserve(layout.slots().size());
  for (std::size_t l = 0; l < layout.slots().size(); ++l) {
    const LayerSlot& slot = layout.slots()[l];
    const auto begin = theta.begin();
    DenseVector w(std::vector<double>(begin + slot.offset_w, begin + slot.offset_b));
    DenseVector b(std::vector<double>(begin + slot.offset_b, begin + slot.offset_b + slot.n_out));
    std::optional<ActivationKind> act;
    if (l + 1 < layout.slots().size()) act = shape.hidden_activations[l];
    layers.emplace_back(unvec(w, slot.n_in, slot.n_out), std::move(b), act);
  }
  return Network(std::move(layers), shape.head);
}

Network param_unpack(const NetworkShape& shape, const ParamVector& params) {
  if (!(params.layout == ParamLayout(shape.widths))) {
    throw DimensionError("param_unpack: parameter layout does not match the network shape");
  }
  return param_unpack(shape, params.theta);
}

ForwardTrace forward(const Network& network, const DenseVector& x) {
  if (x.size() != network.input_dim()) {
    throw DimensionError("forward: input length " + std::to_string(x.size()) +
                         " vs network input " + std::to_string(network.input_dim()));
  }
  ForwardTrace trace;
  trace.x = x;
  trace.z.reserve(network.layer_count());
  trace.a.reserve(network.layer_count());
  for (std::size_t l = 0; l < network.layer_count(); ++l) {
    LayerOutput out = dense_forward(network.layer(l), trace.layer_input(l));
    trace.z.push_back(std::move(out.z));
    trace.a.push_back(std::move(out.a));
  }
  trace.yhat = head_apply(network.head(), trace.z.back());
  return trace;
}

std::vector<DenseVector> backward_deltas(const Network& network, const ForwardTrace& trace,
                                         DenseVector delta_last) {
  const std::size_t layers = network.layer_count();
  if (delta_last.size() != network.output_dim()) {
    throw DimensionError("backward_deltas: delta length " + std::to_string(delta_last.size()) +
                         " vs output " + std::to_string(network.output_dim()));
  }
  std::vector<DenseVector> deltas(layers);
  deltas[layers - 1] = std::move(delta_last);
  for (std::size_t l = layers - 1; l > 0; --l) {
    const DenseMatrix& w_next = network.layer(l).weights();
    const DenseVector fprime =
        activation_jacobian_diag(*network.layer(l - 1).activation(), trace.z[l - 1]);
    const DenseVector& upstream = deltas[l];
    DenseVector delta(w_next.rows());
    for (std::size_t i = 0; i < w_next.rows(); ++i) {
      if (fprime[i] == 0.0) continue;
      delta[i] = fprime[i] * dot(w_next.row(i), upstream.span());
    }
    deltas[l - 1] = std::move(delta);
  }
  return deltas;
}

DenseVector assemble_gradient(const Network& network, const ForwardTrace& trace,
                              std::span<const DenseVector> deltas) {
  if (deltas.size() != network.layer_count()) {
    throw DimensionError("assemble_gradient: one delta per layer required");
  }
  DenseVector grad(network.param_count());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < network.layer_count(); ++l) {
    const LocalJacobian jac(trace.layer_input(l), network.layer(l).n_out());
    const DenseVector block = apply_local_jacobian_transpose(jac, deltas[l]);
    for (std::size_t i = 0; i < block.size(); ++i) grad[offset + i] = block[i];
    offset += block.size();
  }
  return grad;
}

GradResult backprop(const Network& network, const DenseVector& x, const Target& y) {
  check_target(network.head(), y, network.output_dim());
  ForwardTrace trace = forward(network, x);
  const std::vector<DenseVector> deltas =
      backward_deltas(network, trace, grad_z_last(network.head(), y, trace.yhat));
  GradResult result;
  result.grad = assemble_gradient(network, trace, deltas);
  result.loss = loss_eval(network.head(), y, trace.yhat);
  result.yhat = std::move(trace.yhat);
  return result;
}

DenseMatrix param_jacobian_dense(const Network& network, const ForwardTrace& trace,
                                 std::size_t param_cap) {
  if (network.param_count() > param_cap) {
    throw ReferenceTooLargeError("dense reference: " + std::to_string(network.param_count()) +
                                 " parameters exceed the cap of " + std::to_string(param_cap));
  }
  const std::size_t layers = network.layer_count();
  // chain = J_{z^[l]} z^[L], built from the output side: I, then
  // chain * W^[l+1]^T * diag(f'(z^[l])) at each step down.
  std::vector<DenseMatrix> blocks(layers);
  DenseMatrix chain = DenseMatrix::identity(network.output_dim());
  for (std::size_t l = layers; l-- > 0;) {
    const LocalJacobian local(trace.layer_input(l), network.layer(l).n_out());
    blocks[l] = matmul(chain, materialize_local_jacobian(local));
    if (l > 0) {
      const DenseMatrix activation_jac =
          diag(activation_jacobian_diag(*network.layer(l - 1).activation(), trace.z[l - 1]));
      chain = matmul(matmul(chain, transpose(network.layer(l).weights())), activation_jac);
    }
  }
  DenseMatrix full;
  for (const DenseMatrix& block : blocks) full = hcat(full, block);
  return full;
}

GradResult backprop_dense_reference(const Network& network, const DenseVector& x,
                                    const Target& y, std::size_t param_cap) {
  check_target(network.head(), y, network.output_dim());
  ForwardTrace trace = forward(network, x);
  const DenseMatrix jac = param_jacobian_dense(network, trace, param_cap);
  const DenseVector g = grad_z_last(network.head(), y, trace.yhat);
  GradResult result;
  result.grad = matvec(transpose(jac), g);
  result.loss = loss_eval(network.head(), y, trace.yhat);
  result.yhat = std::move(trace.yhat);
  return result;
}

double loss_of_params(const NetworkShape& shape, const DenseVector& theta, const DenseVector& x,
                      const Target& y) {
  const Network network = param_unpack(shape, theta);
  return loss_eval(shape.head, y, forward(network, x).yhat);
}

}  // namespace jacprop
