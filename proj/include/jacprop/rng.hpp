#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace jacprop {

/// Seeded generator with a fixed, platform-independent output sequence.
///
/// Raw bits come from std::mt19937_64, whose sequence is pinned by the C++
/// standard. The standard distributions are not (their algorithms are
/// implementation-defined), so every derived draw is computed here:
///   uniform01: top 53 bits of one raw draw, scaled by 2^-53, in [0, 1)
///   normal:    Box-Muller on two uniform01 draws, the sine branch cached
///   below(n):  rejection sampling on the raw 64-bit draw
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derives an independent stream seed from (seed, stream) via splitmix64.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);
  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace jacprop
