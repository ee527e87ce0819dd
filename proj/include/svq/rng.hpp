#pragma once

#include <cstdint>
#include <random>

namespace svq {

/// Seedable random stream. Uniform variates are built from raw 64-bit
/// engine output so that a seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on the inclusive range [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Seed for an independent substream `stream` of `master`.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace svq
