#pragma once

#include <cstdint>

namespace dyad {

/// PCG32 (XSH-RR output, 64-bit LCG state). The stream argument selects the
/// LCG increment, so Pcg32(seed, i) for i = 0, 1, ... yields independent
/// substreams from one seed. Every random draw in the library goes through
/// this generator and the helpers below, so results never depend on the
/// standard library's distribution implementations.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint32_t below(std::uint32_t bound) noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Exponential with the given mean.
  double exponential(double mean) noexcept;
  /// Normal via Box-Muller (no cached second variate).
  double normal(double mean = 0.0, double stddev = 1.0) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

/// SplitMix64 finalizer; used to derive child seeds from (seed, tag) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

}  // namespace dyad
