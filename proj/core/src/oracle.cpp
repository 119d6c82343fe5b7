#include "s2g/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "s2g/error.hpp"
#include "s2g/stats.hpp"

namespace s2g::oracle {

namespace {

void require_dim(const GaussianMixture& gmm, std::size_t n) {
  if (gmm.dim() != n)
    throw DimensionError("oracle: point has " + std::to_string(n) +
                         " coordinates, mixture has " +
                         std::to_string(gmm.dim()));
}

/// log(w_k) + log N(x; mu_k, diag var_k) for every component.
std::vector<double> component_log_terms(const GaussianMixture& gmm,
                                        std::span<const double> x) {
  require_dim(gmm, x.size());
  std::vector<double> terms;
  terms.reserve(gmm.size());
  for (const auto& c : gmm.components()) {
    double acc = std::log(c.weight);
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - c.mean[d];
      acc -= 0.5 * (diff * diff / c.variance[d] +
                    std::log(2.0 * std::numbers::pi * c.variance[d]));
    }
    terms.push_back(acc);
  }
  return terms;
}

double log_sum_exp(std::span<const double> terms) {
  const double m = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double v : terms) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace

GaussianMixture perturbed_mixture(const GaussianMixture& gmm,
                                  const NoiseSchedule& sched, int t) {
  const double ab = sched.alpha_bar(t);
  if (t == 0) return gmm;
  const double signal = std::sqrt(ab);
  std::vector<Component> out;
  out.reserve(gmm.size());
  for (const auto& c : gmm.components()) {
    Component p{c.weight, c.mean, c.variance};
    for (std::size_t d = 0; d < gmm.dim(); ++d) {
      p.mean[d] = signal * c.mean[d];
      p.variance[d] = ab * c.variance[d] + (1.0 - ab);
    }
    out.push_back(std::move(p));
  }
  return GaussianMixture(std::move(out));
}

double log_density(const GaussianMixture& gmm, std::span<const double> x) {
  const auto terms = component_log_terms(gmm, x);
  return log_sum_exp(terms);
}

double density(const GaussianMixture& gmm, std::span<const double> x) {
  return std::exp(log_density(gmm, x));
}

Vector score(const GaussianMixture& gmm, std::span<const double> x) {
  const auto terms = component_log_terms(gmm, x);
  const double lse = log_sum_exp(terms);
  Vector s(x.size(), 0.0);
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    const double resp = std::exp(terms[k] - lse);
    const auto& c = gmm[k];
    for (std::size_t d = 0; d < x.size(); ++d)
      s[d] -= resp * (x[d] - c.mean[d]) / c.variance[d];
  }
  return s;
}

Vector score(const GaussianMixture& gmm, const NoiseSchedule& sched, int t,
             std::span<const double> x) {
  return score(perturbed_mixture(gmm, sched, t), x);
}

Vector posterior_mean_denoiser(const GaussianMixture& gmm,
                               const NoiseSchedule& sched, int t,
                               std::span<const double> x) {
  if (t < 1) throw ValueError("posterior_mean_denoiser: t must be >= 1");
  return scale(score(gmm, sched, t, x), -sched.sigma(t));
}

Vector posterior_mean_x0(const GaussianMixture& gmm, const NoiseSchedule& sched,
                         int t, std::span<const double> x) {
  const Vector eps = posterior_mean_denoiser(gmm, sched, t, x);
  const double sigma = sched.sigma(t);
  const double signal = sched.signal(t);
  Vector out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d)
    out[d] = (x[d] - sigma * eps[d]) / signal;
  return out;
}

Vector guided_oracle_score(const GaussianMixture& cond,
                           const GaussianMixture& uncond,
                           const NoiseSchedule& sched, int t,
                           std::span<const double> x, double lambda) {
  if (cond.dim() != uncond.dim())
    throw DimensionError("guided_oracle_score: cond/uncond dims differ");
  const Vector sc = score(cond, sched, t, x);
  const Vector su = score(uncond, sched, t, x);
  Vector out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d)
    out[d] = (1.0 - lambda) * su[d] + lambda * sc[d];
  return out;
}

SampleBatch sample_ground_truth(const GaussianMixture& gmm, std::size_t n,
                                Rng& rng) {
  if (n == 0) throw ValueError("sample_ground_truth: n must be >= 1");
  SampleBatch batch;
  batch.points = Matrix(n, gmm.dim());
  batch.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    std::size_t k = 0;
    double cum = 0.0;
    for (; k + 1 < gmm.size(); ++k) {
      cum += gmm[k].weight;
      if (u < cum) break;
    }
    const auto& c = gmm[k];
    for (std::size_t d = 0; d < gmm.dim(); ++d)
      batch.points(i, d) = c.mean[d] + std::sqrt(c.variance[d]) * rng.normal();
    batch.labels[i] = static_cast<int>(k);
  }
  return batch;
}

SampleBatch sample_stratified(const GaussianMixture& gmm, std::size_t n, Rng& rng) {
  if (n == 0) throw ValueError("sample_stratified: n must be >= 1");
  // floor(n w_k) each, the remainder to the largest fractional parts
  std::vector<std::size_t> counts(gmm.size());
  std::vector<std::pair<double, std::size_t>> frac;
  std::size_t used = 0;
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    const double want = static_cast<double>(n) * gmm[k].weight;
    counts[k] = static_cast<std::size_t>(std::floor(want));
    used += counts[k];
    frac.emplace_back(want - std::floor(want), k);
  }
  std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++counts[frac[i % frac.size()].second];
  SampleBatch batch;
  batch.points = Matrix(n, gmm.dim());
  batch.labels.resize(n);
  std::size_t row = 0;
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    const auto& c = gmm[k];
    for (std::size_t i = 0; i < counts[k]; ++i, ++row) {
      for (std::size_t d = 0; d < gmm.dim(); ++d)
        batch.points(row, d) = c.mean[d] + std::sqrt(c.variance[d]) * rng.normal();
      batch.labels[row] = static_cast<int>(k);
    }
  }
  return batch;
}

double cdf_1d(const GaussianMixture& gmm, double x) {
  require_dim(gmm, 1);
  double acc = 0.0;
  for (const auto& c : gmm.components())
    acc += c.weight * stats::normal_cdf((x - c.mean[0]) / std::sqrt(c.variance[0]));
  return acc;
}

double quantile_1d(const GaussianMixture& gmm, double p) {
  require_dim(gmm, 1);
  if (!(p > 0.0 && p < 1.0)) throw ValueError("quantile_1d: p outside (0, 1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : gmm.components()) {
    const double s = std::sqrt(c.variance[0]);
    lo = std::min(lo, c.mean[0] - 40.0 * s);
    hi = std::max(hi, c.mean[0] + 40.0 * s);
  }
  while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (cdf_1d(gmm, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

OracleDenoiser::OracleDenoiser(GaussianMixture gmm, NoiseSchedule sched)
    : gmm_(std::move(gmm)), sched_(std::move(sched)) {}

Matrix OracleDenoiser::predict(const Matrix& x, int t, ClassLabel c,
                               const BlockMask* mask) const {
  if (mask != nullptr && mask->dropped_count() > 0)
    throw ValueError("OracleDenoiser: has no blocks to mask");
  if (x.cols() != gmm_.dim())
    throw DimensionError("OracleDenoiser: input dim mismatch");
  if (t < 1) throw ValueError("OracleDenoiser: t must be >= 1");
  if (!c.is_null() && static_cast<std::size_t>(c.id()) >= gmm_.size())
    throw ValueError("OracleDenoiser: class id out of range");
  const GaussianMixture law =
      perturbed_mixture(c.is_null() ? gmm_ : gmm_.conditional(c.id()), sched_, t);
  const double sigma = sched_.sigma(t);
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Vector s = score(law, x.row(r));
    for (std::size_t d = 0; d < x.cols(); ++d) out(r, d) = -sigma * s[d];
  }
  return out;
}

}  // namespace s2g::oracle
