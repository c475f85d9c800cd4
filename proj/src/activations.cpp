#include "jacprop/activations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jacprop/errors.hpp"

namespace jacprop {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Identity: return "identity";
    case ActivationKind::Softmax: return "softmax";
  }
  return "?";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "relu") return ActivationKind::ReLU;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "identity") return ActivationKind::Identity;
  if (name == "softmax") return ActivationKind::Softmax;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

DenseVector softmax(const DenseVector& z) {
  if (z.size() < 2) {
    throw InvalidHeadError("softmax needs at least 2 entries, got " + std::to_string(z.size()));
  }
  const double peak = *std::max_element(z.begin(), z.end());
  DenseVector out(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

DenseVector apply_activation(ActivationKind kind, const DenseVector& z) {
  if (kind == ActivationKind::Softmax) return softmax(z);
  DenseVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    switch (kind) {
      case ActivationKind::ReLU: out[i] = z[i] > 0.0 ? z[i] : 0.0; break;
      case ActivationKind::Sigmoid: out[i] = sigmoid(z[i]); break;
      default: out[i] = z[i]; break;
    }
  }
  return out;
}

DenseVector activation_jacobian_diag(ActivationKind kind, const DenseVector& z) {
  if (kind == ActivationKind::Softmax) {
    throw UnsupportedError("softmax Jacobian is not diagonal; use the fused SoftmaxCE head");
  }
  DenseVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    switch (kind) {
      case ActivationKind::ReLU: out[i] = z[i] > 0.0 ? 1.0 : 0.0; break;
      case ActivationKind::Sigmoid: {
        const double s = sigmoid(z[i]);
        out[i] = s * (1.0 - s);
        break;
      }
      default: out[i] = 1.0; break;
    }
  }
  return out;
}

}  // namespace jacprop
