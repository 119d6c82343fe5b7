#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace s2g {

/// Counter-based SplitMix64 stream.
///
/// Exact update rule (portable, reproducible in any language):
///
///   state += 0x9E3779B97F4A7C15            (mod 2^64)
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// The initial state equals the seed. `uniform()` maps the top 53 bits to
/// [0, 1): (u64 >> 11) * 2^-53. Normal variates use Box-Muller on pairs of
/// uniforms (u1, u2): r = sqrt(-2 ln(1 - u1)), the first variate is
/// r cos(2 pi u2) and the second r sin(2 pi u2), which is cached and returned
/// by the next call.
///
/// Child streams: `split(label)` seeds a new stream with
/// mix64(seed ^ fnv1a64(label)) and leaves the parent untouched. Children are
/// keyed on the parent's seed, not on how far the parent has advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed), state_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1).
  double uniform() noexcept;

  /// Uniform integer in [0, n). Uses next_u64() % n; the bias is below
  /// n / 2^64 and the result is bit-exact everywhere.
  std::uint64_t uniform_int(std::uint64_t n);

  double normal() noexcept;

  std::vector<double> normal_vector(std::size_t n);

  Rng split(std::string_view label) const noexcept;
  Rng split(std::string_view label, std::uint64_t index) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// The SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// n i.i.d. standard normal variates drawn from `rng`. Requires n >= 1.
std::vector<double> gauss_draw(Rng& rng, std::size_t n);

}  // namespace s2g
