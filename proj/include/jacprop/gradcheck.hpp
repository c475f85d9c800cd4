#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "jacprop/network.hpp"
#include "jacprop/numkernel.hpp"

namespace jacprop {

using ScalarFunction = std::function<double(const DenseVector&)>;

/// cbrt(machine epsilon): balances truncation against cancellation for central differences.
double default_fd_step();

/// One central-difference partial derivative along coordinate i, same step rule
/// as finite_diff_gradient.
double finite_diff_partial(const ScalarFunction& f, const DenseVector& theta, std::size_t i,
                           double h = default_fd_step());

/// Central differences (f(theta + h_i e_i) - f(theta - h_i e_i)) / (2 h_i) with
/// h_i = h * max(1, |theta_i|). Throws OracleFailureError if f is non-finite.
DenseVector finite_diff_gradient(const ScalarFunction& f, const DenseVector& theta,
                                 double h = default_fd_step());

// Extended-precision oracle. The loss is re-evaluated by a separate long double
// forward pass, so the finite-difference gradient shares no arithmetic with
// the code it checks, and its absolute error (~1e-13 against ~1e-11 in double)
// stays inside a 1e-6 relative budget for small gradient components.

using ExtendedScalarFunction = std::function<long double(std::span<const long double>)>;

/// cbrt(epsilon of long double).
long double extended_fd_step();

/// Central differences in extended precision, h_i = h * max(1, |theta_i|).
DenseVector finite_diff_gradient_extended(const ExtendedScalarFunction& f,
                                          const DenseVector& theta,
                                          long double h = extended_fd_step());

/// One extended-precision partial derivative, same step rule.
double finite_diff_partial_extended(const ExtendedScalarFunction& f, const DenseVector& theta,
                                    std::size_t i, long double h = extended_fd_step());

/// loss(y, head(z^[L](theta))) computed entirely in long double.
long double loss_of_params_extended(const NetworkShape& shape, std::span<const long double> theta,
                                    const DenseVector& x, const Target& y);

/// Head plus loss on given logits, in long double.
long double head_loss_extended(HeadKind head, const Target& y, std::span<const long double> z_last);

/// Finite-difference gradient of the network loss at its current parameters.
DenseVector network_fd_gradient(const Network& network, const DenseVector& x, const Target& y);

/// |a - b| / max(1e-12, |a| + |b|).
double relative_error(double a, double b);

enum class BlockPart { Weights, Bias };

struct BlockError {
  std::size_t layer;  // 1-based
  BlockPart part;
  double max_rel_error;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::optional<std::size_t> worst_index;  // 0-based
  std::vector<BlockError> blocks;
  double tolerance = 0.0;
  bool pass = true;
};

GradCheckReport compare_gradients(const DenseVector& g1, const DenseVector& g2, double tol);
/// Same, plus per-block maxima keyed by layer and W/b.
GradCheckReport compare_gradients(const DenseVector& g1, const DenseVector& g2, double tol,
                                  const ParamLayout& layout);

/// The four one-layer models whose gradients have textbook closed forms.
enum class ClassicModelKind {
  SimpleLinearRegression,    // x in R,   yhat = w x + b,               SE
  SimpleBinaryClassifier,    // x in R^2, yhat = sigmoid(w^T x + b),    BCE
  MultipleLinearRegression,  // x in R^n, yhat = w^T x + b,             SE
  LogisticRegression,        // x in R^n, yhat = sigmoid(w^T x + b),    BCE
};

std::string_view to_string(ClassicModelKind kind);
HeadKind classic_head(ClassicModelKind kind);
/// Input dimension; n is used only by the models with free input size.
std::size_t classic_input_dim(ClassicModelKind kind, std::size_t n);

/// -2 [x; 1] (y - yhat) for the regressions, -[x; 1] (y - sigmoid(w^T x + b)) for
/// the classifiers. theta = [w; b].
DenseVector closed_form_one_layer_gradient(ClassicModelKind kind, const DenseVector& x, double y,
                                           const DenseVector& theta);

/// The equivalent one-layer network (n_in -> 1) carrying theta.
Network classic_network(ClassicModelKind kind, const DenseVector& theta);

/// Structured backprop, dense reference and finite differences on one sample.
struct TriangleReport {
  GradCheckReport structured_vs_reference;
  GradCheckReport structured_vs_fd;
  GradCheckReport reference_vs_fd;
  double loss = 0.0;
  bool pass = false;
};

TriangleReport oracle_triangle(const Network& network, const DenseVector& x, const Target& y,
                               double reference_tol = 1e-12, double fd_tol = 1e-6);

/// Uniform inputs on [-1, 1] and a random target of the head's kind; used by
/// the randomized checks and the gradcheck CLI.
DenseVector random_input(std::size_t n, Rng& rng);
Target random_target(HeadKind head, std::size_t out_dim, Rng& rng);

/// True if some ReLU pre-activation lies within margin of the kink at 0.
bool near_relu_kink(const Network& network, const DenseVector& x, double margin = 1e-4);

std::string format_report(const GradCheckReport& report, std::string_view title);
nlohmann::json report_to_json(const GradCheckReport& report);

}  // namespace jacprop
