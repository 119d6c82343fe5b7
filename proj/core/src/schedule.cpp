#include "s2g/schedule.hpp"

#include <cmath>
#include <string>

#include "s2g/error.hpp"

namespace s2g {

NoiseSchedule NoiseSchedule::linear(int T, double beta_start, double beta_end) {
  if (T < 1) throw ValueError("NoiseSchedule: T must be >= 1");
  const double factor = 1000.0 / static_cast<double>(T);
  std::vector<double> betas(static_cast<std::size_t>(T));
  for (int i = 0; i < T; ++i) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(i) / (T - 1);
    betas[static_cast<std::size_t>(i)] =
        factor * (beta_start + frac * (beta_end - beta_start));
  }
  NoiseSchedule s(std::move(betas));
  s.beta_start_ref_ = beta_start;
  s.beta_end_ref_ = beta_end;
  return s;
}

NoiseSchedule::NoiseSchedule(std::vector<double> betas)
    : betas_(std::move(betas)) {
  if (betas_.empty()) throw ValueError("NoiseSchedule: no timesteps");
  alpha_bar_.resize(betas_.size() + 1);
  alpha_bar_[0] = 1.0;
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0))
      throw ValueError("NoiseSchedule: beta(" + std::to_string(i + 1) +
                       ") outside (0, 1)");
    alpha_bar_[i + 1] = alpha_bar_[i] * (1.0 - b);
  }
  if (alpha_bar_.back() > 0.01)
    throw ValueError("NoiseSchedule: alpha_bar(T) = " +
                     std::to_string(alpha_bar_.back()) + " exceeds 0.01");
}

void NoiseSchedule::check_t(int t, int lo) const {
  if (t < lo || t > T())
    throw ValueError("timestep " + std::to_string(t) + " outside [" +
                     std::to_string(lo) + ", " + std::to_string(T()) + "]");
}

double NoiseSchedule::beta(int t) const {
  check_t(t, 1);
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_t(t, 0);
  return alpha_bar_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::sigma(int t) const { return std::sqrt(1.0 - alpha_bar(t)); }

double NoiseSchedule::signal(int t) const { return std::sqrt(alpha_bar(t)); }

}  // namespace s2g
