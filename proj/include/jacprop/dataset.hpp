#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jacprop/losses.hpp"
#include "jacprop/numkernel.hpp"

namespace jacprop {

struct Sample {
  DenseVector x;
  Target y;
};

/// Samples of uniform feature and target dimension.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Sample> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t target_dim() const noexcept { return target_dim_; }

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<Sample> samples_;
  std::size_t feature_dim_ = 0;
  std::size_t target_dim_ = 0;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049
inline constexpr std::size_t kIdxClasses = 10;

/// Reads an IDX image/label pair. Pixels are scaled by 1/255 and flattened
/// row-major; labels become one-hot vectors of length 10. Keeps the first
/// `limit` samples when given. Errors are IngestionError with the byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<std::size_t> limit = std::nullopt);

enum class SynthKind { Linear, Logistic, Blobs };

std::string_view to_string(SynthKind kind);
/// "linear", "logistic", "blobs"; std::invalid_argument otherwise.
SynthKind parse_synth_kind(std::string_view name);

/// Generative rules (all draws from Rng(seed) in the order listed):
///  Linear:   A (input_dim x output_dim) and c (output_dim) uniform on [-1, 1];
///            per sample x ~ U[-1, 1]^d, y = A^T x + c + noise * N(0, 1).
///  Logistic: w (input_dim) and c uniform on [-1, 1]; per sample x ~ U[-1, 1]^d,
///            y = 1 if w^T x + c > 0 else 0. output_dim must be 1; noise unused.
///  Blobs:    k = max(2, output_dim) centers uniform on [0, 1]^d; per sample
///            label ~ U{0..k-1}, x = center + noise * N(0, 1) per coordinate.
///            output_dim == 1 gives binary targets, otherwise one-hot.
struct SynthSpec {
  SynthKind kind = SynthKind::Blobs;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  double noise = 0.0;
};

Dataset synth_dataset(const SynthSpec& spec);

}  // namespace jacprop
