#pragma once

#include <cstddef>
#include <vector>

namespace s2g {

/// Discrete variance-preserving schedule.
///
/// Timesteps run 0..T. t = 0 is clean data (alpha_bar = 1); for t >= 1,
/// alpha_bar(t) = prod_{s<=t} (1 - beta(s)) and x_t = sqrt(alpha_bar) x_0 +
/// sigma_t eps with sigma_t = sqrt(1 - alpha_bar(t)).
class NoiseSchedule {
 public:
  /// Linear betas from beta_start to beta_end, both given in the units of a
  /// 1000-step schedule and multiplied by 1000 / T.
  static NoiseSchedule linear(int T, double beta_start = 1e-4,
                              double beta_end = 0.02);

  /// betas[i] is beta(i + 1). Throws ValueError unless each beta lies in
  /// (0, 1) and the final alpha_bar is <= 0.01.
  explicit NoiseSchedule(std::vector<double> betas);

  int T() const noexcept { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const;
  double sigma(int t) const;
  double signal(int t) const;  // sqrt(alpha_bar)

  double beta_start() const noexcept { return beta_start_ref_; }
  double beta_end() const noexcept { return beta_end_ref_; }

 private:
  void check_t(int t, int lo) const;

  std::vector<double> betas_;
  std::vector<double> alpha_bar_;  // size T + 1
  double beta_start_ref_ = 0.0;
  double beta_end_ref_ = 0.0;
};

}  // namespace s2g
