#include "jacprop/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jacprop/errors.hpp"

namespace jacprop {

std::string_view to_string(HeadKind head) {
  switch (head) {
    case HeadKind::SigmoidBCE: return "sigmoid_bce";
    case HeadKind::SoftmaxCE: return "softmax_ce";
    case HeadKind::IdentitySE: return "identity_se";
  }
  return "?";
}

HeadKind parse_head(std::string_view name) {
  if (name == "sigmoid_bce") return HeadKind::SigmoidBCE;
  if (name == "softmax_ce") return HeadKind::SoftmaxCE;
  if (name == "identity_se") return HeadKind::IdentitySE;
  throw std::invalid_argument("unknown head '" + std::string(name) + "'");
}

ActivationKind head_activation(HeadKind head) {
  switch (head) {
    case HeadKind::SigmoidBCE: return ActivationKind::Sigmoid;
    case HeadKind::SoftmaxCE: return ActivationKind::Softmax;
    case HeadKind::IdentitySE: return ActivationKind::Identity;
  }
  return ActivationKind::Identity;
}

Target Target::binary(double y) {
  if (y != 0.0 && y != 1.0) {
    throw InvalidTargetError("binary target must be 0 or 1, got " + std::to_string(y));
  }
  return Target(Kind::Binary, DenseVector{y});
}

Target Target::one_hot(std::size_t index, std::size_t classes) {
  if (index >= classes) {
    throw InvalidTargetError("class index " + std::to_string(index) + " out of range for " +
                             std::to_string(classes) + " classes");
  }
  DenseVector v(classes);
  v[index] = 1.0;
  return Target(Kind::OneHot, std::move(v));
}

Target Target::one_hot(const DenseVector& encoded) {
  std::size_t ones = 0;
  for (double v : encoded) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw InvalidTargetError("one-hot target has an entry that is neither 0 nor 1");
    }
  }
  if (ones != 1) {
    throw InvalidTargetError("one-hot target must contain exactly one 1, found " +
                             std::to_string(ones));
  }
  return Target(Kind::OneHot, encoded);
}

Target Target::real(DenseVector values) {
  if (!all_finite(values.span())) throw InvalidTargetError("real target has non-finite entries");
  return Target(Kind::Real, std::move(values));
}

std::optional<std::size_t> Target::label() const {
  switch (kind_) {
    case Kind::Binary: return static_cast<std::size_t>(values_[0]);
    case Kind::OneHot:
      return static_cast<std::size_t>(
          std::distance(values_.begin(), std::find(values_.begin(), values_.end(), 1.0)));
    case Kind::Real: return std::nullopt;
  }
  return std::nullopt;
}

Target::Kind target_kind_for(HeadKind head) {
  switch (head) {
    case HeadKind::SigmoidBCE: return Target::Kind::Binary;
    case HeadKind::SoftmaxCE: return Target::Kind::OneHot;
    case HeadKind::IdentitySE: return Target::Kind::Real;
  }
  return Target::Kind::Real;
}

void check_target(HeadKind head, const Target& y, std::size_t out_dim) {
  if (y.kind() != target_kind_for(head)) {
    throw InvalidTargetError("target kind does not match head " + std::string(to_string(head)));
  }
  if (y.size() != out_dim) {
    throw DimensionError("target length " + std::to_string(y.size()) + " vs head output " +
                         std::to_string(out_dim));
  }
}

DenseVector head_apply(HeadKind head, const DenseVector& z_last) {
  switch (head) {
    case HeadKind::SigmoidBCE:
      if (z_last.size() != 1) {
        throw DimensionError("sigmoid_bce head takes one logit, got " +
                             std::to_string(z_last.size()));
      }
      return DenseVector{sigmoid(z_last[0])};
    case HeadKind::SoftmaxCE:
      if (z_last.size() < 2) {
        throw DimensionError("softmax_ce head needs at least 2 classes, got " +
                             std::to_string(z_last.size()));
      }
      return apply_activation(ActivationKind::Softmax, z_last);
    case HeadKind::IdentitySE: return z_last;
  }
  return z_last;
}

namespace {

double clamped_log(double p) {
  return std::log(std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp));
}

}  // namespace

double loss_eval(HeadKind head, const Target& y, const DenseVector& yhat) {
  check_target(head, y, yhat.size());
  const DenseVector& t = y.values();
  switch (head) {
    case HeadKind::SigmoidBCE: {
      const double p = yhat[0];
      // A zero coefficient drops its term so log(eps) never leaks in at y in {0, 1}.
      double loss = 0.0;
      if (t[0] != 0.0) loss -= t[0] * clamped_log(p);
      if (t[0] != 1.0) loss -= (1.0 - t[0]) * clamped_log(1.0 - p);
      return loss;
    }
    case HeadKind::SoftmaxCE: {
      double loss = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] != 0.0) loss -= t[i] * clamped_log(yhat[i]);
      }
      return loss;
    }
    case HeadKind::IdentitySE: {
      double loss = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = t[i] - yhat[i];
        loss += r * r;
      }
      return loss;
    }
  }
  return 0.0;
}

DenseVector grad_z_last(HeadKind head, const Target& y, const DenseVector& yhat) {
  check_target(head, y, yhat.size());
  const double factor = head == HeadKind::IdentitySE ? -2.0 : -1.0;
  DenseVector g(yhat.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = factor * (y.values()[i] - yhat[i]);
  return g;
}

}  // namespace jacprop
