#pragma once

#include <cstdint>
#include <random>

namespace stablesep {

/// Seeded 64-bit generator with deterministic stream splitting.
///
/// Child streams are derived by hashing (parent seed, stream id) through
/// SplitMix64, so independent tasks can draw from their own generator without
/// sharing mutable state.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Generator for an independent sub-stream; does not advance this one.
  Rng split(std::uint64_t stream) const;

  double normal(double mean = 0.0, double sd = 1.0);
  double uniform(double lo = 0.0, double hi = 1.0);

  engine_type& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace stablesep
