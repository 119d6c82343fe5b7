#pragma once

#include <span>

#include "s2g/mixture.hpp"
#include "s2g/predictor.hpp"
#include "s2g/rng.hpp"
#include "s2g/sample_batch.hpp"
#include "s2g/schedule.hpp"
#include "s2g/tensor.hpp"

namespace s2g::oracle {

/// Exact law of x_t: component i becomes N(sqrt(ab) mu_i, ab var_i + 1 - ab).
/// Throws ValueError if t is outside [0, T].
GaussianMixture perturbed_mixture(const GaussianMixture& gmm,
                                  const NoiseSchedule& sched, int t);

double log_density(const GaussianMixture& gmm, std::span<const double> x);
double density(const GaussianMixture& gmm, std::span<const double> x);
Vector score(const GaussianMixture& gmm, std::span<const double> x);

/// grad log p_t(x) for the perturbed mixture.
Vector score(const GaussianMixture& gmm, const NoiseSchedule& sched, int t,
             std::span<const double> x);

/// Bayes-optimal noise prediction eps* = -sigma_t * score. Requires t >= 1.
Vector posterior_mean_denoiser(const GaussianMixture& gmm,
                               const NoiseSchedule& sched, int t,
                               std::span<const double> x);

/// E[x_0 | x_t] = (x - sigma_t eps*) / sqrt(alpha_bar_t).
Vector posterior_mean_x0(const GaussianMixture& gmm, const NoiseSchedule& sched,
                         int t, std::span<const double> x);

/// CFG-guided score in the form (1 - lambda) s_uncond + lambda s_cond, which
/// is linear in lambda and returns each branch exactly at lambda = 0 or 1.
Vector guided_oracle_score(const GaussianMixture& cond,
                           const GaussianMixture& uncond,
                           const NoiseSchedule& sched, int t,
                           std::span<const double> x, double lambda);

/// i.i.d. draws: component by weight, then a diagonal Gaussian draw. Labels
/// are component indices.
SampleBatch sample_ground_truth(const GaussianMixture& gmm, std::size_t n,
                                Rng& rng);

/// Class-balanced draws: component k gets floor(n w_k) rows plus one of the
/// leftover rows when its fractional part is among the largest. Rows are
/// grouped by component.
SampleBatch sample_stratified(const GaussianMixture& gmm, std::size_t n, Rng& rng);

/// Mixture CDF, 1-D only.
double cdf_1d(const GaussianMixture& gmm, double x);
/// Inverse of cdf_1d by bisection to 1e-13, p in (0, 1).
double quantile_1d(const GaussianMixture& gmm, double p);

/// Closed-form posterior-mean noise predictor over a labelled mixture:
/// class k is component k, the null label is the full mixture. Has no
/// maskable blocks.
class OracleDenoiser final : public NoisePredictor {
 public:
  OracleDenoiser(GaussianMixture gmm, NoiseSchedule sched);

  std::size_t dim() const override { return gmm_.dim(); }
  std::size_t num_classes() const override { return gmm_.size(); }
  std::size_t block_count() const override { return 0; }

  Matrix predict(const Matrix& x, int t, ClassLabel c,
                 const BlockMask* mask = nullptr) const override;

 private:
  GaussianMixture gmm_;
  NoiseSchedule sched_;
};

}  // namespace s2g::oracle
