#include "jacprop/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "jacprop/errors.hpp"
#include "jacprop/rng.hpp"

namespace jacprop {

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) return;
  feature_dim_ = samples_.front().x.size();
  target_dim_ = samples_.front().y.size();
  for (const Sample& s : samples_) {
    if (s.x.size() != feature_dim_ || s.y.size() != target_dim_) {
      throw DimensionError("Dataset: samples have inconsistent dimensions");
    }
    if (s.y.kind() != samples_.front().y.kind()) {
      throw InvalidTargetError("Dataset: samples mix target kinds");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Sample> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(samples_.at(i));
  return Dataset(std::move(picked));
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError(path, 0, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::string& path, const char* field) {
  if (bytes.size() < offset + 4) {
    throw IngestionError(path, bytes.size(), std::string("truncated before ") + field);
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<std::size_t> limit) {
  const std::vector<unsigned char> images = read_file(images_path);
  const std::vector<unsigned char> labels = read_file(labels_path);

  if (read_be32(images, 0, images_path, "magic") != kIdxImageMagic) {
    throw IngestionError(images_path, 0, "bad image magic (expected 0x00000803)");
  }
  if (read_be32(labels, 0, labels_path, "magic") != kIdxLabelMagic) {
    throw IngestionError(labels_path, 0, "bad label magic (expected 0x00000801)");
  }
  const std::size_t image_count = read_be32(images, 4, images_path, "image count");
  const std::size_t rows = read_be32(images, 8, images_path, "row count");
  const std::size_t cols = read_be32(images, 12, images_path, "column count");
  const std::size_t label_count = read_be32(labels, 4, labels_path, "label count");
  if (image_count != label_count) {
    throw IngestionError(labels_path, 4,
                         "label count " + std::to_string(label_count) + " != image count " +
                             std::to_string(image_count));
  }
  constexpr std::size_t image_header = 16;
  constexpr std::size_t label_header = 8;
  const std::size_t pixels = rows * cols;
  if (images.size() != image_header + image_count * pixels) {
    throw IngestionError(images_path, std::min(images.size(), image_header + image_count * pixels),
                         "expected " + std::to_string(image_header + image_count * pixels) +
                             " bytes, file has " + std::to_string(images.size()));
  }
  if (labels.size() != label_header + label_count) {
    throw IngestionError(labels_path, std::min(labels.size(), label_header + label_count),
                         "expected " + std::to_string(label_header + label_count) +
                             " bytes, file has " + std::to_string(labels.size()));
  }

  const std::size_t count = limit ? std::min(*limit, image_count) : image_count;
  std::vector<Sample> samples;
  samples.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t label_offset = label_header + n;
    if (labels[label_offset] >= kIdxClasses) {
      throw IngestionError(labels_path, label_offset,
                           "label " + std::to_string(labels[label_offset]) + " outside 0..9");
    }
    DenseVector x(pixels);
    const unsigned char* src = images.data() + image_header + n * pixels;
    for (std::size_t p = 0; p < pixels; ++p) x[p] = static_cast<double>(src[p]) / 255.0;
    samples.push_back({std::move(x), Target::one_hot(labels[label_offset], kIdxClasses)});
  }
  return Dataset(std::move(samples));
}

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::Linear: return "linear";
    case SynthKind::Logistic: return "logistic";
    case SynthKind::Blobs: return "blobs";
  }
  return "?";
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "linear") return SynthKind::Linear;
  if (name == "logistic") return SynthKind::Logistic;
  if (name == "blobs") return SynthKind::Blobs;
  throw std::invalid_argument("unknown synthetic dataset kind '" + std::string(name) + "'");
}

Dataset synth_dataset(const SynthSpec& spec) {
  if (spec.n == 0 || spec.input_dim == 0 || spec.output_dim == 0) {
    throw DimensionError("synth_dataset: n, input_dim and output_dim must be positive");
  }
  Rng rng(spec.seed);
  const std::size_t d = spec.input_dim;
  std::vector<Sample> samples;
  samples.reserve(spec.n);

  switch (spec.kind) {
    case SynthKind::Linear: {
      DenseMatrix a(d, spec.output_dim);
      for (double& v : a.span()) v = rng.uniform(-1.0, 1.0);
      DenseVector c(spec.output_dim);
      for (double& v : c) v = rng.uniform(-1.0, 1.0);
      for (std::size_t n = 0; n < spec.n; ++n) {
        DenseVector x(d);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        DenseVector y = add(transpose_matvec(a, x), c);
        if (spec.noise != 0.0) {
          for (double& v : y) v += spec.noise * rng.normal();
        }
        samples.push_back({std::move(x), Target::real(std::move(y))});
      }
      break;
    }
    case SynthKind::Logistic: {
      if (spec.output_dim != 1) throw DimensionError("synth_dataset: logistic needs output_dim 1");
      DenseVector w(d);
      for (double& v : w) v = rng.uniform(-1.0, 1.0);
      const double c = rng.uniform(-1.0, 1.0);
      for (std::size_t n = 0; n < spec.n; ++n) {
        DenseVector x(d);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        const double score = dot(w.span(), x.span()) + c;
        samples.push_back({std::move(x), Target::binary(score > 0.0 ? 1.0 : 0.0)});
      }
      break;
    }
    case SynthKind::Blobs: {
      const std::size_t classes = std::max<std::size_t>(2, spec.output_dim);
      DenseMatrix centers(classes, d);
      for (double& v : centers.span()) v = rng.uniform(0.0, 1.0);
      for (std::size_t n = 0; n < spec.n; ++n) {
        const std::size_t label = rng.below(classes);
        DenseVector x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = centers(label, i) + spec.noise * rng.normal();
        Target y = spec.output_dim == 1 ? Target::binary(static_cast<double>(label))
                                        : Target::one_hot(label, classes);
        samples.push_back({std::move(x), std::move(y)});
      }
      break;
    }
  }
  return Dataset(std::move(samples));
}

}  // namespace jacprop
