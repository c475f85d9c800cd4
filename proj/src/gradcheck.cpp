#include "jacprop/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "jacprop/activations.hpp"
#include "jacprop/errors.hpp"

namespace jacprop {

double default_fd_step() { return std::cbrt(std::numeric_limits<double>::epsilon()); }

namespace {

double central_difference(const ScalarFunction& f, DenseVector& probe, std::size_t i, double h) {
  const double origin = probe[i];
  const double step = h * std::max(1.0, std::abs(origin));
  const double up = origin + step;
  const double down = origin - step;
  probe[i] = up;
  const double f_up = f(probe);
  probe[i] = down;
  const double f_down = f(probe);
  probe[i] = origin;
  if (!std::isfinite(f_up) || !std::isfinite(f_down)) {
    throw OracleFailureError("non-finite function value probing coordinate " + std::to_string(i));
  }
  // Divide by the step actually taken after rounding origin +- step.
  return (f_up - f_down) / (up - down);
}

}  // namespace

double finite_diff_partial(const ScalarFunction& f, const DenseVector& theta, std::size_t i,
                           double h) {
  if (!(h > 0.0)) throw OracleFailureError("finite differences need a positive step");
  if (i >= theta.size()) throw DimensionError("finite_diff_partial: index out of range");
  DenseVector probe = theta;
  return central_difference(f, probe, i, h);
}

DenseVector finite_diff_gradient(const ScalarFunction& f, const DenseVector& theta, double h) {
  if (!(h > 0.0)) throw OracleFailureError("finite differences need a positive step");
  DenseVector grad(theta.size());
  DenseVector probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) grad[i] = central_difference(f, probe, i, h);
  return grad;
}

long double extended_fd_step() { return std::cbrt(std::numeric_limits<long double>::epsilon()); }

namespace {

double central_difference_extended(const ExtendedScalarFunction& f, std::vector<long double>& probe,
                                   std::size_t i, long double h) {
  const long double origin = probe[i];
  const long double step = h * std::max(1.0L, std::abs(origin));
  const long double up = origin + step;
  const long double down = origin - step;
  probe[i] = up;
  const long double f_up = f(probe);
  probe[i] = down;
  const long double f_down = f(probe);
  probe[i] = origin;
  if (!std::isfinite(f_up) || !std::isfinite(f_down)) {
    throw OracleFailureError("non-finite function value probing coordinate " + std::to_string(i));
  }
  return static_cast<double>((f_up - f_down) / (up - down));
}

}  // namespace

DenseVector finite_diff_gradient_extended(const ExtendedScalarFunction& f,
                                          const DenseVector& theta, long double h) {
  if (!(h > 0.0L)) throw OracleFailureError("finite differences need a positive step");
  std::vector<long double> probe(theta.begin(), theta.end());
  DenseVector grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) grad[i] = central_difference_extended(f, probe, i, h);
  return grad;
}

double finite_diff_partial_extended(const ExtendedScalarFunction& f, const DenseVector& theta,
                                    std::size_t i, long double h) {
  if (!(h > 0.0L)) throw OracleFailureError("finite differences need a positive step");
  if (i >= theta.size()) throw DimensionError("finite_diff_partial_extended: index out of range");
  std::vector<long double> probe(theta.begin(), theta.end());
  return central_difference_extended(f, probe, i, h);
}

namespace {

long double sigmoid_ld(long double v) {
  if (v >= 0.0L) return 1.0L / (1.0L + std::exp(-v));
  const long double e = std::exp(v);
  return e / (1.0L + e);
}

long double clamped_log_ld(long double p) {
  const long double eps = kProbabilityClamp;
  return std::log(std::clamp(p, eps, 1.0L - eps));
}

}  // namespace

long double head_loss_extended(HeadKind head, const Target& y, std::span<const long double> z) {
  check_target(head, y, z.size());
  const DenseVector& t = y.values();
  switch (head) {
    case HeadKind::SigmoidBCE: {
      const long double p = sigmoid_ld(z[0]);
      long double loss = 0.0L;
      if (t[0] != 0.0) loss -= t[0] * clamped_log_ld(p);
      if (t[0] != 1.0) loss -= (1.0L - t[0]) * clamped_log_ld(1.0L - p);
      return loss;
    }
    case HeadKind::SoftmaxCE: {
      const long double peak = *std::max_element(z.begin(), z.end());
      long double total = 0.0L;
      for (long double v : z) total += std::exp(v - peak);
      long double loss = 0.0L;
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (t[i] != 0.0) loss -= t[i] * clamped_log_ld(std::exp(z[i] - peak) / total);
      }
      return loss;
    }
    case HeadKind::IdentitySE: {
      long double loss = 0.0L;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const long double r = t[i] - z[i];
        loss += r * r;
      }
      return loss;
    }
  }
  return 0.0L;
}

long double loss_of_params_extended(const NetworkShape& shape, std::span<const long double> theta,
                                    const DenseVector& x, const Target& y) {
  const ParamLayout layout(shape.widths);
  if (theta.size() != layout.total() || x.size() != shape.widths.front()) {
    throw DimensionError("loss_of_params_extended: theta or input does not fit the shape");
  }
  std::vector<long double> a(x.begin(), x.end());
  std::vector<long double> z;
  for (std::size_t l = 0; l < layout.slots().size(); ++l) {
    const LayerSlot& slot = layout.slots()[l];
    z.assign(slot.n_out, 0.0L);
    for (std::size_t j = 0; j < slot.n_out; ++j) {
      long double acc = theta[slot.offset_b + j];
      for (std::size_t i = 0; i < slot.n_in; ++i) {
        acc += theta[slot.offset_w + j * slot.n_in + i] * a[i];
      }
      z[j] = acc;
    }
    if (l + 1 == layout.slots().size()) break;
    a.assign(slot.n_out, 0.0L);
    for (std::size_t j = 0; j < slot.n_out; ++j) {
      switch (shape.hidden_activations[l]) {
        case ActivationKind::ReLU: a[j] = z[j] > 0.0L ? z[j] : 0.0L; break;
        case ActivationKind::Sigmoid: a[j] = sigmoid_ld(z[j]); break;
        case ActivationKind::Identity: a[j] = z[j]; break;
        case ActivationKind::Softmax: throw InvalidHeadError("softmax hidden layer");
      }
    }
  }
  return head_loss_extended(shape.head, y, z);
}

DenseVector network_fd_gradient(const Network& network, const DenseVector& x, const Target& y) {
  const NetworkShape shape = network.shape();
  return finite_diff_gradient_extended(
      [&](std::span<const long double> theta) {
        return loss_of_params_extended(shape, theta, x, y);
      },
      param_pack(network).theta);
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1e-12, std::abs(a) + std::abs(b));
}

GradCheckReport compare_gradients(const DenseVector& g1, const DenseVector& g2, double tol) {
  if (g1.size() != g2.size()) {
    throw DimensionError("compare_gradients: lengths " + std::to_string(g1.size()) + " and " +
                         std::to_string(g2.size()));
  }
  GradCheckReport report;
  report.tolerance = tol;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double err = relative_error(g1[i], g2[i]);
    // NaN compares false everywhere; treat it as the worst possible error.
    if (!report.worst_index || err > report.max_rel_error || std::isnan(err)) {
      report.max_rel_error = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
      report.worst_index = i;
    }
  }
  report.pass = report.max_rel_error <= tol;
  return report;
}

GradCheckReport compare_gradients(const DenseVector& g1, const DenseVector& g2, double tol,
                                  const ParamLayout& layout) {
  if (layout.total() != g1.size()) {
    throw DimensionError("compare_gradients: layout covers " + std::to_string(layout.total()) +
                         " entries, gradient has " + std::to_string(g1.size()));
  }
  GradCheckReport report = compare_gradients(g1, g2, tol);
  for (std::size_t l = 0; l < layout.slots().size(); ++l) {
    const LayerSlot& slot = layout.slots()[l];
    const auto block_max = [&](std::size_t begin, std::size_t end) {
      double worst = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const double err = relative_error(g1[i], g2[i]);
        worst = std::isnan(err) ? std::numeric_limits<double>::infinity() : std::max(worst, err);
      }
      return worst;
    };
    report.blocks.push_back({l + 1, BlockPart::Weights, block_max(slot.offset_w, slot.offset_b)});
    report.blocks.push_back(
        {l + 1, BlockPart::Bias, block_max(slot.offset_b, slot.offset_b + slot.n_out)});
  }
  return report;
}

std::string_view to_string(ClassicModelKind kind) {
  switch (kind) {
    case ClassicModelKind::SimpleLinearRegression: return "simple_linear_regression";
    case ClassicModelKind::SimpleBinaryClassifier: return "simple_binary_classifier";
    case ClassicModelKind::MultipleLinearRegression: return "multiple_linear_regression";
    case ClassicModelKind::LogisticRegression: return "logistic_regression";
  }
  return "?";
}

HeadKind classic_head(ClassicModelKind kind) {
  switch (kind) {
    case ClassicModelKind::SimpleLinearRegression:
    case ClassicModelKind::MultipleLinearRegression: return HeadKind::IdentitySE;
    case ClassicModelKind::SimpleBinaryClassifier:
    case ClassicModelKind::LogisticRegression: return HeadKind::SigmoidBCE;
  }
  return HeadKind::IdentitySE;
}

std::size_t classic_input_dim(ClassicModelKind kind, std::size_t n) {
  switch (kind) {
    case ClassicModelKind::SimpleLinearRegression: return 1;
    case ClassicModelKind::SimpleBinaryClassifier: return 2;
    default: return n;
  }
}

DenseVector closed_form_one_layer_gradient(ClassicModelKind kind, const DenseVector& x, double y,
                                           const DenseVector& theta) {
  const std::size_t n = x.size();
  if (n == 0 || n != classic_input_dim(kind, n)) {
    throw DimensionError(std::string(to_string(kind)) + ": unexpected input length " +
                         std::to_string(n));
  }
  if (theta.size() != n + 1) {
    throw DimensionError(std::string(to_string(kind)) + ": theta must have length " +
                         std::to_string(n + 1));
  }
  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i) score += theta[i] * x[i];
  score += theta[n];

  double factor = 0.0;
  if (classic_head(kind) == HeadKind::IdentitySE) {
    factor = -2.0 * (y - score);
  } else {
    if (y != 0.0 && y != 1.0) throw InvalidTargetError("classifier label must be 0 or 1");
    factor = -(y - 1.0 / (1.0 + std::exp(-score)));
  }
  DenseVector grad(n + 1);
  for (std::size_t i = 0; i < n; ++i) grad[i] = x[i] * factor;
  grad[n] = factor;
  return grad;
}

Network classic_network(ClassicModelKind kind, const DenseVector& theta) {
  if (theta.size() < 2) throw DimensionError("classic_network: theta too short");
  NetworkShape shape{{theta.size() - 1, 1}, {}, classic_head(kind)};
  return param_unpack(shape, theta);
}

DenseVector random_input(std::size_t n, Rng& rng) {
  DenseVector x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

Target random_target(HeadKind head, std::size_t out_dim, Rng& rng) {
  switch (head) {
    case HeadKind::SigmoidBCE: return Target::binary(static_cast<double>(rng.below(2)));
    case HeadKind::SoftmaxCE: return Target::one_hot(rng.below(out_dim), out_dim);
    case HeadKind::IdentitySE: return Target::real(random_input(out_dim, rng));
  }
  return Target::real(DenseVector(out_dim));
}

bool near_relu_kink(const Network& network, const DenseVector& x, double margin) {
  const ForwardTrace trace = forward(network, x);
  for (std::size_t l = 0; l < network.layer_count(); ++l) {
    if (network.layer(l).activation() != ActivationKind::ReLU) continue;
    for (double z : trace.z[l]) {
      if (std::abs(z) < margin) return true;
    }
  }
  return false;
}

TriangleReport oracle_triangle(const Network& network, const DenseVector& x, const Target& y,
                               double reference_tol, double fd_tol) {
  const ParamVector params = param_pack(network);
  const GradResult structured = backprop(network, x, y);
  const GradResult reference = backprop_dense_reference(network, x, y);
  const DenseVector fd = network_fd_gradient(network, x, y);

  TriangleReport report;
  report.loss = structured.loss;
  report.structured_vs_reference =
      compare_gradients(structured.grad, reference.grad, reference_tol, params.layout);
  report.structured_vs_fd = compare_gradients(structured.grad, fd, fd_tol, params.layout);
  report.reference_vs_fd = compare_gradients(reference.grad, fd, fd_tol, params.layout);
  report.pass = report.structured_vs_reference.pass && report.structured_vs_fd.pass &&
                report.reference_vs_fd.pass;
  return report;
}

std::string format_report(const GradCheckReport& report, std::string_view title) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-28s max rel err %.3e (tol %.1e)  %s", std::string(title).c_str(),
                report.max_rel_error, report.tolerance, report.pass ? "PASS" : "FAIL");
  out << buf;
  if (report.worst_index) out << "  worst index " << *report.worst_index;
  out << '\n';
  for (const BlockError& block : report.blocks) {
    std::snprintf(buf, sizeof(buf), "    layer %zu %s  %.3e\n", block.layer,
                  block.part == BlockPart::Weights ? "W" : "b", block.max_rel_error);
    out << buf;
  }
  return out.str();
}

nlohmann::json report_to_json(const GradCheckReport& report) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const BlockError& block : report.blocks) {
    blocks.push_back({{"layer", block.layer},
                      {"part", block.part == BlockPart::Weights ? "W" : "b"},
                      {"max_rel_error", block.max_rel_error}});
  }
  nlohmann::json worst = nullptr;
  if (report.worst_index) worst = *report.worst_index;
  return {{"max_rel_error", report.max_rel_error},
          {"worst_index", worst},
          {"tolerance", report.tolerance},
          {"pass", report.pass},
          {"blocks", blocks}};
}

}  // namespace jacprop
