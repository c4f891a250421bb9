#pragma once

#include <cstdint>
#include <random>

namespace maxent {

/// std::mt19937_64 with fixed transforms to uniform and normal draws.
///
/// The engine's output is pinned by the standard; the distributions in
/// <random> are not, so the two transforms live here to keep seeds
/// reproducible bit-for-bit across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
  static constexpr result_type max() noexcept { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }
  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller; consumes exactly two draws per call.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace maxent
