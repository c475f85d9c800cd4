#include <algorithm>
#include <cmath>
#include <iterator>
#include <fstream>
#include <stdexcept>

#include "jacprop/errors.hpp"
#include "jacprop/train.hpp"

namespace jacprop {

using nlohmann::json;

namespace {

// Integers parsed from text are unsigned; ones built in code may be signed.
bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

class FieldReader {
 public:
  explicit FieldReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ConfigError(source_, field, what);
  }

  const json& object(const json& parent, const std::string& key, const std::string& path) const {
    if (!parent.contains(key)) fail(path, "missing");
    const json& v = parent.at(key);
    if (!v.is_object()) fail(path, "expected an object");
    return v;
  }

  double number(const json& parent, const std::string& key, const std::string& path) const {
    if (!parent.contains(key)) fail(path, "missing");
    const json& v = parent.at(key);
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const json& parent, const std::string& key, const std::string& path) const {
    if (!parent.contains(key)) fail(path, "missing");
    const json& v = parent.at(key);
    if (!is_count(v)) fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const json& parent, const std::string& key, const std::string& path) const {
    if (!parent.contains(key)) fail(path, "missing");
    const json& v = parent.at(key);
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& parent, const std::string& key, const std::string& path) const {
    const json& v = parent.at(key);
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

NetworkShape parse_model(const FieldReader& r, const json& model) {
  NetworkShape shape;
  if (!model.contains("layers") || !model.at("layers").is_array()) {
    r.fail("model.layers", "expected an array of widths");
  }
  const json& layers = model.at("layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!is_count(layers[i]) || layers[i].get<std::uint64_t>() == 0) {
      r.fail("model.layers[" + std::to_string(i) + "]", "expected a positive integer");
    }
    shape.widths.push_back(layers[i].get<std::size_t>());
  }
  if (shape.widths.size() < 2) r.fail("model.layers", "need input width plus at least one layer");

  const std::size_t hidden = shape.widths.size() - 2;
  if (model.contains("activation")) {
    const json& act = model.at("activation");
    const auto parse_one = [&](const json& v, const std::string& path) {
      if (!v.is_string()) r.fail(path, "expected an activation name");
      try {
        const ActivationKind kind = parse_activation(v.get<std::string>());
        if (!is_elementwise(kind)) r.fail(path, "softmax is only available as a head");
        return kind;
      } catch (const std::invalid_argument& e) {
        r.fail(path, e.what());
      }
    };
    if (act.is_array()) {
      if (act.size() != hidden) {
        r.fail("model.activation", "expected " + std::to_string(hidden) + " entries");
      }
      for (std::size_t i = 0; i < act.size(); ++i) {
        shape.hidden_activations.push_back(
            parse_one(act[i], "model.activation[" + std::to_string(i) + "]"));
      }
    } else {
      shape.hidden_activations.assign(hidden, parse_one(act, "model.activation"));
    }
  } else if (hidden > 0) {
    r.fail("model.activation", "missing (required when the model has hidden layers)");
  }

  try {
    shape.head = parse_head(r.string(model, "head", "model.head"));
  } catch (const std::invalid_argument& e) {
    r.fail("model.head", e.what());
  }
  try {
    shape.validate();
  } catch (const Error& e) {
    r.fail("model", e.what());
  }
  return shape;
}

DatasetSource parse_dataset(const FieldReader& r, const json& ds, std::uint64_t default_seed) {
  DatasetSource source;
  const std::string kind = r.string(ds, "source", "dataset.source");
  if (kind == "idx") {
    source.kind = DatasetSource::Kind::Idx;
    source.images_path = r.string(ds, "images", "dataset.images");
    source.labels_path = r.string(ds, "labels", "dataset.labels");
    if (ds.contains("limit")) source.limit = r.count(ds, "limit", "dataset.limit");
  } else if (kind == "synthetic") {
    source.kind = DatasetSource::Kind::Synthetic;
    try {
      source.synth.kind = parse_synth_kind(r.string(ds, "kind", "dataset.kind"));
    } catch (const std::invalid_argument& e) {
      r.fail("dataset.kind", e.what());
    }
    source.synth.n = r.count(ds, "n", "dataset.n");
    source.synth.noise = ds.contains("noise") ? r.number(ds, "noise", "dataset.noise") : 0.0;
    source.synth.seed = ds.contains("seed") ? r.count(ds, "seed", "dataset.seed") : default_seed;
  } else {
    r.fail("dataset.source", "expected \"idx\" or \"synthetic\", got \"" + kind + "\"");
  }
  return source;
}

}  // namespace

void TrainConfig::validate(const std::string& source) const {
  try {
    model.validate();
  } catch (const Error& e) {
    throw ConfigError(source, "model", e.what());
  }
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw ConfigError(source, "learning_rate", "must be finite and non-negative");
  }
  if (batch_size == 0) throw ConfigError(source, "batch_size", "must be at least 1");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError(source, "holdout_fraction", "must lie in [0, 1)");
  }
  if (dataset.kind == DatasetSource::Kind::Synthetic) {
    if (dataset.synth.n == 0) throw ConfigError(source, "dataset.n", "must be positive");
    if (!std::isfinite(dataset.synth.noise) || dataset.synth.noise < 0.0) {
      throw ConfigError(source, "dataset.noise", "must be finite and non-negative");
    }
  }
}

TrainConfig parse_train_config(const json& doc, const std::string& source) {
  const FieldReader r(source);
  if (!doc.is_object()) r.fail("<root>", "expected a JSON object");
  static const char* const known[] = {"model",      "learning_rate",    "epochs",
                                      "batch_size", "seed",             "dataset",
                                      "holdout_fraction", "gradcheck_gate", "output"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      r.fail(key, "unknown field");
    }
  }

  TrainConfig config;
  config.model = parse_model(r, r.object(doc, "model", "model"));
  config.learning_rate = r.number(doc, "learning_rate", "learning_rate");
  config.epochs = r.count(doc, "epochs", "epochs");
  config.batch_size = r.count(doc, "batch_size", "batch_size");
  config.seed = r.count(doc, "seed", "seed");
  config.dataset = parse_dataset(r, r.object(doc, "dataset", "dataset"), config.seed);
  if (doc.contains("holdout_fraction")) {
    config.holdout_fraction = r.number(doc, "holdout_fraction", "holdout_fraction");
  }
  if (doc.contains("gradcheck_gate")) {
    config.gradcheck_gate = r.boolean(doc, "gradcheck_gate", "gradcheck_gate");
  }
  if (doc.contains("output")) {
    const json& out = r.object(doc, "output", "output");
    if (out.contains("model")) config.model_path = r.string(out, "model", "output.model");
    if (out.contains("metrics")) config.metrics_path = r.string(out, "metrics", "output.metrics");
  }
  config.validate(source);
  return config;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "<file>", "cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, "<file>", e.what());
  }
  return parse_train_config(doc, path);
}

}  // namespace jacprop
