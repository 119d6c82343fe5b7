#include "s2g/guidance.hpp"

#include <cmath>
#include <string>

#include "s2g/denoiser.hpp"
#include "s2g/error.hpp"

namespace s2g {

std::string_view to_string(GuidanceKind kind) noexcept {
  switch (kind) {
    case GuidanceKind::Unguided: return "unguided";
    case GuidanceKind::CFG: return "cfg";
    case GuidanceKind::Autoguidance: return "autoguidance";
    case GuidanceKind::NaiveS2: return "naive_s2";
    case GuidanceKind::S2: return "s2";
  }
  return "unknown";
}

GuidanceKind parse_guidance_kind(std::string_view text) {
  for (auto k : {GuidanceKind::Unguided, GuidanceKind::CFG, GuidanceKind::Autoguidance,
                 GuidanceKind::NaiveS2, GuidanceKind::S2})
    if (to_string(k) == text) return k;
  throw ValueError("unknown guidance kind '" + std::string(text) + "'");
}

GuidanceSpec GuidanceSpec::unguided() { return {}; }

GuidanceSpec GuidanceSpec::cfg(double lambda) {
  GuidanceSpec s;
  s.kind = GuidanceKind::CFG;
  s.lambda = lambda;
  return s;
}

GuidanceSpec GuidanceSpec::autoguidance(double ag_scale, std::string weak_ref) {
  GuidanceSpec s;
  s.kind = GuidanceKind::Autoguidance;
  s.ag_scale = ag_scale;
  s.weak_ref = std::move(weak_ref);
  return s;
}

GuidanceSpec GuidanceSpec::naive_s2(double lambda, double omega, int n_subnets,
                                    double drop_ratio) {
  GuidanceSpec s;
  s.kind = GuidanceKind::NaiveS2;
  s.lambda = lambda;
  s.omega = omega;
  s.n_subnets = n_subnets;
  s.drop_ratio = drop_ratio;
  return s;
}

GuidanceSpec GuidanceSpec::s2(double lambda, double omega, double drop_ratio) {
  GuidanceSpec s;
  s.kind = GuidanceKind::S2;
  s.lambda = lambda;
  s.omega = omega;
  s.drop_ratio = drop_ratio;
  return s;
}

void GuidanceSpec::validate() const {
  if (!std::isfinite(lambda)) throw ValueError("lambda must be finite");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ValueError("omega must be >= 0");
  if (n_subnets < 1) throw ValueError("n_subnets must be >= 1");
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0))
    throw ValueError("drop_ratio must lie in [0, 1)");
  if (drop_count && *drop_count < 0) throw ValueError("drop_count must be >= 0");
  if (!std::isfinite(ag_scale)) throw ValueError("ag_scale must be finite");
  if (kind == GuidanceKind::Autoguidance && weak_ref.empty())
    throw ValueError("weak_ref is required for autoguidance");
}

std::size_t GuidanceSpec::drops_for(std::size_t blocks) const {
  if (drop_count) {
    const auto k = static_cast<std::size_t>(*drop_count);
    if (k >= blocks)
      throw ValueError("drop_count " + std::to_string(k) + " must be < block count " +
                       std::to_string(blocks));
    return k;
  }
  return drop_count_for(blocks, drop_ratio);
}

double GuidanceSpec::coefficient_sum() const noexcept {
  switch (kind) {
    case GuidanceKind::NaiveS2:
    case GuidanceKind::S2: return 1.0 - omega;
    default: return 1.0;
  }
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": prediction lengths differ (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

std::size_t GuidanceSpec::calls_per_step(std::size_t blocks) const {
  switch (kind) {
    case GuidanceKind::Unguided: return 1;
    case GuidanceKind::CFG: return 2;
    case GuidanceKind::Autoguidance: return 2;
    case GuidanceKind::S2: return 3;
    case GuidanceKind::NaiveS2:
      return 2 + (exhaustive ? binomial(blocks, drops_for(blocks))
                             : static_cast<std::size_t>(n_subnets));
  }
  return 0;
}

Vector cfg_combine(std::span<const double> d_uncond, std::span<const double> d_cond,
                   double lambda) {
  require_same(d_uncond.size(), d_cond.size(), "cfg_combine");
  Vector out(d_cond.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - lambda) * d_uncond[i] + lambda * d_cond[i];
  return out;
}

Vector s2_combine(std::span<const double> d_uncond, std::span<const double> d_cond,
                  std::span<const double> d_weak, double lambda, double omega) {
  require_same(d_cond.size(), d_weak.size(), "s2_combine");
  Vector out = cfg_combine(d_uncond, d_cond, lambda);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= omega * d_weak[i];
  return out;
}

Vector naive_s2_combine(std::span<const double> d_uncond,
                        std::span<const double> d_cond,
                        const std::vector<Vector>& d_weak_list, double lambda,
                        double omega) {
  if (d_weak_list.empty()) throw ValueError("naive_s2_combine: empty weak prediction list");
  Vector mean(d_cond.size(), 0.0);
  for (const auto& w : d_weak_list) {
    require_same(d_cond.size(), w.size(), "naive_s2_combine");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += w[i];
  }
  const double n = static_cast<double>(d_weak_list.size());
  for (auto& v : mean) v /= n;
  return s2_combine(d_uncond, d_cond, mean, lambda, omega);
}

Vector autoguidance_combine(std::span<const double> d_weak_model,
                            std::span<const double> d_strong, double ag_scale) {
  require_same(d_weak_model.size(), d_strong.size(), "autoguidance_combine");
  Vector out(d_strong.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - ag_scale) * d_weak_model[i] + ag_scale * d_strong[i];
  return out;
}

Matrix posterior_mean_over_masks(const NoisePredictor& net, const Matrix& x, int t,
                                 ClassLabel c, const std::vector<BlockMask>& masks) {
  if (masks.empty()) throw ValueError("posterior_mean_over_masks: no masks");
  Matrix acc(x.rows(), net.dim(), 0.0);
  for (const auto& m : masks) {
    const Matrix pred = net.predict(x, t, c, &m);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += pred.data()[i];
  }
  const double n = static_cast<double>(masks.size());
  for (auto& v : acc.data()) v /= n;
  return acc;
}

Matrix epistemic_variance(const NoisePredictor& net, const Matrix& x, int t,
                          ClassLabel c, const std::vector<BlockMask>& masks) {
  if (masks.size() < 2) throw ValueError("epistemic_variance: need at least two masks");
  std::vector<Matrix> preds;
  preds.reserve(masks.size());
  Matrix mean(x.rows(), net.dim(), 0.0);
  for (const auto& m : masks) {
    preds.push_back(net.predict(x, t, c, &m));
    for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] += preds.back().data()[i];
  }
  const double n = static_cast<double>(masks.size());
  for (auto& v : mean.data()) v /= n;
  Matrix var(x.rows(), net.dim(), 0.0);
  for (const auto& p : preds)
    for (std::size_t i = 0; i < var.size(); ++i) {
      const double d = p.data()[i] - mean.data()[i];
      var.data()[i] += d * d;
    }
  for (auto& v : var.data()) v /= n;
  return var;
}

}  // namespace s2g
