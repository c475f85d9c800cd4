#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "jacprop/activations.hpp"
#include "jacprop/numkernel.hpp"

namespace jacprop {

/// The three legal pairings of last-layer activation and loss.
enum class HeadKind { SigmoidBCE, SoftmaxCE, IdentitySE };

std::string_view to_string(HeadKind head);
/// Accepts "sigmoid_bce", "softmax_ce", "identity_se"; std::invalid_argument otherwise.
HeadKind parse_head(std::string_view name);
ActivationKind head_activation(HeadKind head);

/// Probabilities are clamped to [eps, 1 - eps] before entering log().
inline constexpr double kProbabilityClamp = 1e-12;

/// A label. Each factory enforces the invariant of its kind, so a Target that
/// exists is always well formed; pairing it with a head is checked at use.
class Target {
 public:
  enum class Kind { Binary, OneHot, Real };

  /// y must be exactly 0 or 1.
  static Target binary(double y);
  static Target one_hot(std::size_t index, std::size_t classes);
  /// Exactly one entry equal to 1, every other entry 0.
  static Target one_hot(const DenseVector& encoded);
  static Target real(DenseVector values);

  Kind kind() const noexcept { return kind_; }
  const DenseVector& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Class index for Binary / OneHot targets.
  std::optional<std::size_t> label() const;

  friend bool operator==(const Target&, const Target&) = default;

 private:
  Target(Kind kind, DenseVector values) : kind_(kind), values_(std::move(values)) {}

  Kind kind_;
  DenseVector values_;
};

Target::Kind target_kind_for(HeadKind head);

/// Throws InvalidTargetError when the target kind does not fit the head and
/// DimensionError when its length differs from out_dim.
void check_target(HeadKind head, const Target& y, std::size_t out_dim);

/// yhat = f^[L](z^[L]). SigmoidBCE needs a length-1 input, SoftmaxCE at least two.
DenseVector head_apply(HeadKind head, const DenseVector& z_last);

/// BCE, CE or SE (un-averaged, no 1/2 factor).
double loss_eval(HeadKind head, const Target& y, const DenseVector& yhat);

/// Gradient of loss(y, f^[L](z)) with respect to z^[L], written in terms of yhat:
/// -(y - yhat) for both cross-entropy heads and -2 (y - yhat) for SE.
DenseVector grad_z_last(HeadKind head, const Target& y, const DenseVector& yhat);

}  // namespace jacprop
