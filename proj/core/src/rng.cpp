#include "s2g/rng.hpp"

#include <cmath>
#include <numbers>

#include "s2g/error.hpp"
#include "s2g/hash.hpp"

namespace s2g {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw ValueError("uniform_int: n must be positive");
  return next_u64() % n;
}

double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

std::vector<double> Rng::normal_vector(std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = normal();
  return out;
}

Rng Rng::split(std::string_view label) const noexcept {
  return Rng(mix64(seed_ ^ fnv1a64(label)));
}

Rng Rng::split(std::string_view label, std::uint64_t index) const noexcept {
  return Rng(mix64(mix64(seed_ ^ fnv1a64(label)) + index * kGolden));
}

std::vector<double> gauss_draw(Rng& rng, std::size_t n) {
  if (n == 0) throw ValueError("gauss_draw: n must be >= 1");
  return rng.normal_vector(n);
}

}  // namespace s2g
