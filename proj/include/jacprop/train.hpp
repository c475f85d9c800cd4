#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "jacprop/dataset.hpp"
#include "jacprop/network.hpp"

namespace jacprop {

struct DatasetSource {
  enum class Kind { Idx, Synthetic };
  Kind kind = Kind::Synthetic;
  std::string images_path;
  std::string labels_path;
  std::optional<std::size_t> limit;
  /// input_dim / output_dim are filled from the model when loading.
  SynthSpec synth;
};

struct TrainConfig {
  NetworkShape model;
  double learning_rate = 0.01;
  std::size_t epochs = 1;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  DatasetSource dataset;
  double holdout_fraction = 0.0;
  bool gradcheck_gate = true;
  std::string model_path;    // empty: do not write
  std::string metrics_path;  // empty: do not write

  /// Throws ConfigError naming the offending field.
  void validate(const std::string& source = "config") const;
};

/// Parses the JSON config schema documented in docs/formats.md.
TrainConfig parse_train_config(const nlohmann::json& doc, const std::string& source);
TrainConfig load_train_config(const std::string& path);

/// Materializes the configured dataset, filling synthetic dimensions from the model.
Dataset load_dataset(const DatasetSource& source, const NetworkShape& model);

/// theta - lr * grad. lr must be finite and non-negative.
DenseVector sgd_step(const DenseVector& theta, const DenseVector& grad, double lr);
ParamVector sgd_step(const ParamVector& params, const DenseVector& grad, double lr);

/// Arithmetic mean of per-sample structured gradients and losses, summed in
/// the order the indices are given.
GradResult batch_gradient(const Network& network, const Dataset& data,
                          std::span<const std::size_t> indices);

struct Evaluation {
  double mean_loss = 0.0;
  std::optional<double> accuracy;  // classification heads only
};

Evaluation evaluate(const Network& network, const Dataset& data);

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  std::optional<double> holdout_loss;
  std::optional<double> holdout_accuracy;
  double wall_time_s = 0.0;
};

nlohmann::json to_json(const EpochRecord& record, bool include_wall_time = true);

/// Outcome of the oracle-triangle gate that runs before training.
struct GateReport {
  bool pass = false;
  std::vector<std::string> details;
};

// Gate tolerances. The dense/structured comparison is tight; the finite
// difference comparisons only need to catch convention errors, which are O(1).
inline constexpr double kGateReferenceTol = 1e-12;
inline constexpr double kGateFiniteDiffTol = 1e-5;
inline constexpr std::size_t kGateSamples = 3;

/// Full oracle triangle on kGateSamples kink-free training samples when the
/// network fits the dense reference cap. Above the cap: finite differences on
/// a fixed subset of coordinates of the real network, plus the full triangle
/// on a proxy network of the same depth, activations and head with widths
/// capped at 6.
GateReport pretrain_gradcheck(const Network& network, const Dataset& data, std::uint64_t seed);

struct TrainResult {
  Network model;
  std::vector<EpochRecord> log;
  GateReport gate;
};

using RecordSink = std::function<void(const EpochRecord&)>;

/// Seeded minibatch SGD. Emits one record per epoch (after the epoch-0 record
/// for the initial model); train_loss is the mean loss over the training split
/// evaluated after the epoch's updates. Throws TrainingError on a failed gate
/// or a non-finite loss.
TrainResult train(const TrainConfig& config, const Dataset& data, const RecordSink& sink = {});

/// load_dataset + train, then writes the metrics log and model container to
/// the configured paths.
TrainResult run_training(const TrainConfig& config, const RecordSink& sink = {});

}  // namespace jacprop
