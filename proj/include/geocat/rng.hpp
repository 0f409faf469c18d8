#pragma once

// Portable random streams. Per-replica streams are derived from
// (master_seed, replica index) with SplitMix64 and drive a xoshiro256**
// engine; the samplers below are written out rather than taken from
// <random> so that draws are identical across standard libraries.

#include <array>
#include <cstdint>
#include <limits>

namespace geocat {

/// SplitMix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64_next(std::uint64_t& state) noexcept;

/// Stateless SplitMix64 finalizer applied to `x + golden gamma`.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// xoshiro256** seeded through SplitMix64. Satisfies
/// std::uniform_random_bit_generator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  /// Stream for replica `index` of a run with master seed `master_seed`.
  /// This derivation is part of the reproducibility contract.
  static Rng for_replica(std::uint64_t master_seed, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_pos() noexcept;
  /// Exponential with the given rate.
  double exponential(double rate) noexcept;
  bool bernoulli(double prob) noexcept;
  /// Uniform integer in [0, n), n >= 1 (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace geocat
