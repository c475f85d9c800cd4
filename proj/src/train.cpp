#include "jacprop/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "jacprop/errors.hpp"
#include "jacprop/gradcheck.hpp"
#include "jacprop/model_io.hpp"

namespace jacprop {

namespace {

// Independent PRNG streams derived from the run seed.
enum Stream : std::uint64_t { kInitStream = 1, kSplitStream = 2, kOrderStream = 3, kGateStream = 4 };

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

void check_data_fits(const NetworkShape& model, const Dataset& data) {
  if (data.empty()) throw ConfigError("dataset", "samples", "dataset is empty");
  if (data.feature_dim() != model.widths.front()) {
    throw ConfigError("dataset", "model.layers[0]",
                      "input width " + std::to_string(model.widths.front()) +
                          " does not match feature dimension " +
                          std::to_string(data.feature_dim()));
  }
  if (data.target_dim() != model.widths.back()) {
    throw ConfigError("dataset", "model.layers",
                      "output width " + std::to_string(model.widths.back()) +
                          " does not match target dimension " + std::to_string(data.target_dim()));
  }
  if (data[0].y.kind() != target_kind_for(model.head)) {
    throw ConfigError("dataset", "model.head", "labels do not fit head " +
                                                   std::string(to_string(model.head)));
  }
}

}  // namespace

Dataset load_dataset(const DatasetSource& source, const NetworkShape& model) {
  if (source.kind == DatasetSource::Kind::Idx) {
    return load_idx(source.images_path, source.labels_path, source.limit);
  }
  SynthSpec spec = source.synth;
  spec.input_dim = model.widths.front();
  spec.output_dim = model.widths.back();
  return synth_dataset(spec);
}

DenseVector sgd_step(const DenseVector& theta, const DenseVector& grad, double lr) {
  if (theta.size() != grad.size()) {
    throw DimensionError("sgd_step: theta length " + std::to_string(theta.size()) +
                         " vs gradient " + std::to_string(grad.size()));
  }
  if (!std::isfinite(lr) || lr < 0.0) throw Error("sgd_step: learning rate must be >= 0");
  DenseVector next = theta;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= lr * grad[i];
  return next;
}

ParamVector sgd_step(const ParamVector& params, const DenseVector& grad, double lr) {
  return {sgd_step(params.theta, grad, lr), params.layout};
}

GradResult batch_gradient(const Network& network, const Dataset& data,
                          std::span<const std::size_t> indices) {
  if (indices.empty()) throw DimensionError("batch_gradient: empty batch");
  GradResult total;
  total.grad = DenseVector(network.param_count());
  for (std::size_t i : indices) {
    const Sample& s = data[i];
    GradResult g = backprop(network, s.x, s.y);
    for (std::size_t k = 0; k < g.grad.size(); ++k) total.grad[k] += g.grad[k];
    total.loss += g.loss;
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (double& v : total.grad) v *= inv;
  total.loss *= inv;
  return total;
}

Evaluation evaluate(const Network& network, const Dataset& data) {
  Evaluation eval;
  if (data.empty()) return eval;
  const HeadKind head = network.head();
  const bool classify = head != HeadKind::IdentitySE;
  double loss = 0.0;
  std::size_t correct = 0;
  for (const Sample& s : data.samples()) {
    const DenseVector yhat = forward(network, s.x).yhat;
    loss += loss_eval(head, s.y, yhat);
    if (!classify) continue;
    std::size_t predicted = 0;
    if (head == HeadKind::SigmoidBCE) {
      predicted = yhat[0] >= 0.5 ? 1 : 0;
    } else {
      predicted = static_cast<std::size_t>(
          std::distance(yhat.begin(), std::max_element(yhat.begin(), yhat.end())));
    }
    if (predicted == *s.y.label()) ++correct;
  }
  const double n = static_cast<double>(data.size());
  eval.mean_loss = loss / n;
  if (classify) eval.accuracy = static_cast<double>(correct) / n;
  return eval;
}

nlohmann::json to_json(const EpochRecord& record, bool include_wall_time) {
  nlohmann::json j;
  j["epoch"] = record.epoch;
  j["train_loss"] = record.train_loss;
  j["holdout_loss"] = record.holdout_loss ? nlohmann::json(*record.holdout_loss) : nullptr;
  j["holdout_accuracy"] =
      record.holdout_accuracy ? nlohmann::json(*record.holdout_accuracy) : nullptr;
  if (include_wall_time) j["wall_time_s"] = record.wall_time_s;
  return j;
}

GateReport pretrain_gradcheck(const Network& network, const Dataset& data, std::uint64_t seed) {
  GateReport gate;
  gate.pass = true;

  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < data.size() && picked.size() < kGateSamples; ++i) {
    if (!near_relu_kink(network, data[i].x)) picked.push_back(i);
  }
  if (picked.empty()) {
    gate.pass = false;
    gate.details.push_back("no training sample clear of ReLU kinks");
    return gate;
  }

  if (network.param_count() <= kReferenceParamCap) {
    for (std::size_t i : picked) {
      const TriangleReport t =
          oracle_triangle(network, data[i].x, data[i].y, kGateReferenceTol, kGateFiniteDiffTol);
      gate.pass = gate.pass && t.pass;
      gate.details.push_back("sample " + std::to_string(i) + ": structured/reference " +
                             fmt_double(t.structured_vs_reference.max_rel_error) +
                             ", structured/fd " + fmt_double(t.structured_vs_fd.max_rel_error) +
                             ", reference/fd " + fmt_double(t.reference_vs_fd.max_rel_error));
    }
    return gate;
  }

  Rng rng(Rng::derive_seed(seed, kGateStream));
  const NetworkShape shape = network.shape();
  const ParamVector params = param_pack(network);

  // Spot-check a fixed handful of coordinates per block on the real network.
  for (std::size_t i : picked) {
    const GradResult g = backprop(network, data[i].x, data[i].y);
    const ExtendedScalarFunction loss = [&](std::span<const long double> theta) {
      return loss_of_params_extended(shape, theta, data[i].x, data[i].y);
    };
    double worst = 0.0;
    for (const LayerSlot& slot : params.layout.slots()) {
      const std::size_t w_count = slot.offset_b - slot.offset_w;
      for (int k = 0; k < 6; ++k) {
        const std::size_t idx = slot.offset_w + rng.below(w_count);
        worst = std::max(worst, relative_error(g.grad[idx],
                                               finite_diff_partial_extended(loss, params.theta, idx)));
      }
      for (int k = 0; k < 2; ++k) {
        const std::size_t idx = slot.offset_b + rng.below(slot.n_out);
        worst = std::max(worst, relative_error(g.grad[idx],
                                               finite_diff_partial_extended(loss, params.theta, idx)));
      }
    }
    const bool ok = worst <= kGateFiniteDiffTol;
    gate.pass = gate.pass && ok;
    gate.details.push_back("sample " + std::to_string(i) + ": structured/fd spot check " +
                           fmt_double(worst));
  }

  // Full triangle on a small network with the same conventions.
  NetworkShape proxy = shape;
  for (std::size_t& w : proxy.widths) w = std::min<std::size_t>(w, 6);
  const Network small = init_network(proxy, rng);
  for (std::size_t k = 0; k < kGateSamples; ++k) {
    DenseVector x = random_input(small.input_dim(), rng);
    while (near_relu_kink(small, x)) x = random_input(small.input_dim(), rng);
    const Target y = random_target(proxy.head, small.output_dim(), rng);
    const TriangleReport t = oracle_triangle(small, x, y, kGateReferenceTol, kGateFiniteDiffTol);
    gate.pass = gate.pass && t.pass;
    gate.details.push_back("proxy " + std::to_string(k) + ": structured/reference " +
                           fmt_double(t.structured_vs_reference.max_rel_error) +
                           ", structured/fd " + fmt_double(t.structured_vs_fd.max_rel_error));
  }
  return gate;
}

TrainResult train(const TrainConfig& config, const Dataset& data, const RecordSink& sink) {
  config.validate();
  check_data_fits(config.model, data);
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  Rng init_rng(Rng::derive_seed(config.seed, kInitStream));
  Rng split_rng(Rng::derive_seed(config.seed, kSplitStream));
  Rng order_rng(Rng::derive_seed(config.seed, kOrderStream));

  const std::vector<std::size_t> perm = split_rng.permutation(data.size());
  const auto holdout_count = static_cast<std::size_t>(
      std::floor(config.holdout_fraction * static_cast<double>(data.size())));
  if (holdout_count >= data.size()) {
    throw ConfigError("config", "holdout_fraction", "leaves no training samples");
  }
  const Dataset holdout = data.subset(std::span(perm).first(holdout_count));
  const Dataset train_set = data.subset(std::span(perm).subspan(holdout_count));

  TrainResult result{init_network(config.model, init_rng), {}, {}};
  if (config.gradcheck_gate) {
    result.gate = pretrain_gradcheck(result.model, train_set, config.seed);
    if (!result.gate.pass) {
      std::string msg = "pre-training gradient check failed:";
      for (const auto& line : result.gate.details) msg += "\n  " + line;
      throw TrainingError(msg);
    }
  }

  const auto emit = [&](std::size_t epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = evaluate(result.model, train_set).mean_loss;
    if (!holdout.empty()) {
      const Evaluation h = evaluate(result.model, holdout);
      record.holdout_loss = h.mean_loss;
      record.holdout_accuracy = h.accuracy;
    }
    if (!std::isfinite(record.train_loss)) {
      throw TrainingError("non-finite training loss after epoch " + std::to_string(epoch));
    }
    record.wall_time_s = elapsed();
    result.log.push_back(record);
    if (sink) sink(record);
  };

  emit(0);
  ParamVector params = param_pack(result.model);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> order = order_rng.permutation(train_set.size());
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - begin);
      const GradResult g = batch_gradient(result.model, train_set, std::span(order).subspan(begin, len));
      if (!std::isfinite(g.loss) || !all_finite(g.grad.span())) {
        throw TrainingError("non-finite loss or gradient in epoch " + std::to_string(epoch) +
                            " at batch starting " + std::to_string(begin) + " (loss " +
                            fmt_double(g.loss) + ")");
      }
      params = sgd_step(params, g.grad, config.learning_rate);
      result.model = param_unpack(config.model, params);
    }
    emit(epoch);
  }
  return result;
}

TrainResult run_training(const TrainConfig& config, const RecordSink& sink) {
  const Dataset data = load_dataset(config.dataset, config.model);
  std::ofstream metrics;
  if (!config.metrics_path.empty()) {
    metrics.open(config.metrics_path);
    if (!metrics) throw ConfigError("config", "output.metrics", "cannot open " + config.metrics_path);
  }
  TrainResult result = train(config, data, [&](const EpochRecord& record) {
    if (metrics.is_open()) metrics << to_json(record).dump() << '\n' << std::flush;
    if (sink) sink(record);
  });
  if (!config.model_path.empty()) save_model_file(result.model, config.model_path);
  return result;
}

}  // namespace jacprop
