#pragma once

#include <string_view>

#include "jacprop/numkernel.hpp"

namespace jacprop {

/// ReLU, Sigmoid and Identity act elementwise and may appear in hidden layers.
/// Softmax is only reachable through the SoftmaxCE head.
enum class ActivationKind { ReLU, Sigmoid, Identity, Softmax };

std::string_view to_string(ActivationKind kind);
/// Accepts "relu", "sigmoid", "identity", "softmax"; std::invalid_argument otherwise.
ActivationKind parse_activation(std::string_view name);

constexpr bool is_elementwise(ActivationKind kind) { return kind != ActivationKind::Softmax; }

/// Logistic function, evaluated so that exp() only ever sees a non-positive argument.
double sigmoid(double x);

/// Softmax requires at least two entries (InvalidHeadError otherwise).
DenseVector apply_activation(ActivationKind kind, const DenseVector& z);

/// Diagonal of the activation Jacobian, f'(z_i). ReLU uses f'(0) = 0.
/// Softmax has a dense Jacobian and is rejected with UnsupportedError.
DenseVector activation_jacobian_diag(ActivationKind kind, const DenseVector& z);

}  // namespace jacprop
