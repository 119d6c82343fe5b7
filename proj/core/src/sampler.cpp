#include "s2g/sampler.hpp"

#include <cmath>
#include <string>
#include <thread>

#include "s2g/denoiser.hpp"
#include "s2g/error.hpp"

namespace s2g {

std::string_view to_string(SamplingMode mode) noexcept {
  return mode == SamplingMode::Ancestral ? "ancestral" : "deterministic";
}

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "ancestral") return SamplingMode::Ancestral;
  if (text == "deterministic") return SamplingMode::Deterministic;
  throw ValueError("unknown sampling mode '" + std::string(text) + "'");
}

namespace {

struct StepCoefficients {
  double x_coef, d_coef, noise_sd;
};

StepCoefficients coefficients(int t, const NoiseSchedule& sched, SamplingMode mode) {
  if (t < 1) throw ValueError("scheduler_step: t must be >= 1");
  if (mode == SamplingMode::Ancestral) {
    const double beta = sched.beta(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
    const double var = beta * (1.0 - sched.alpha_bar(t - 1)) / (1.0 - sched.alpha_bar(t));
    return {inv_sqrt_alpha, -inv_sqrt_alpha * beta / sched.sigma(t), std::sqrt(var)};
  }
  // x_{t-1} = sqrt(ab') (x - s d) / sqrt(ab) + s' d
  const double ratio = sched.signal(t - 1) / sched.signal(t);
  return {ratio, sched.sigma(t - 1) - ratio * sched.sigma(t), 0.0};
}

}  // namespace

Vector scheduler_step(std::span<const double> d_tilde, std::span<const double> x_t,
                      int t, const NoiseSchedule& sched, SamplingMode mode, Rng& rng) {
  if (d_tilde.size() != x_t.size())
    throw DimensionError("scheduler_step: d_tilde and x_t differ in length");
  const auto k = coefficients(t, sched, mode);
  Vector out(x_t.size());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = k.x_coef * x_t[d] + k.d_coef * d_tilde[d];
  if (mode == SamplingMode::Ancestral && t > 1)
    for (auto& v : out) v += k.noise_sd * rng.normal();
  return out;
}

Matrix predict_rows(const NoisePredictor& net, const Matrix& x, int t, ClassLabel c,
                    const BlockMask* mask, std::size_t threads) {
  const std::size_t n = x.rows();
  if (threads <= 1 || n < 2 * threads) return net.predict(x, t, c, mask);
  Matrix out(n, net.dim());
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi] {
      try {
        std::vector<double> part(x.data().begin() + lo * x.cols(),
                                 x.data().begin() + hi * x.cols());
        const Matrix pred = net.predict(Matrix(hi - lo, x.cols(), std::move(part)), t, c, mask);
        std::copy(pred.data().begin(), pred.data().end(), out.data().begin() + lo * net.dim());
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

SamplingResult run_sampling(const NoisePredictor& net, const NoiseSchedule& sched,
                            const GuidanceSpec& spec, const SamplingOptions& opts,
                            const Rng& rng, const NoisePredictor* weak_model) {
  spec.validate();
  if (opts.n == 0) throw ValueError("run_sampling: n must be >= 1");
  if (opts.label.is_null() || static_cast<std::size_t>(opts.label.id()) >= net.num_classes())
    throw ValueError("run_sampling: class label out of range");
  const bool masked = spec.kind == GuidanceKind::S2 || spec.kind == GuidanceKind::NaiveS2;
  if (masked && net.block_count() < 2)
    throw ValueError("run_sampling: " + std::string(to_string(spec.kind)) +
                     " needs a network with maskable blocks");
  if (spec.kind == GuidanceKind::Autoguidance) {
    if (weak_model == nullptr)
      throw ValueError("run_sampling: autoguidance requires a weak model (" + spec.weak_ref + ")");
    if (weak_model->dim() != net.dim() || weak_model->num_classes() != net.num_classes())
      throw DimensionError("run_sampling: weak model does not match the network");
  }

  const std::size_t n = opts.n;
  const std::size_t dim = net.dim();
  const int T = sched.T();
  const std::size_t B = net.block_count();
  const std::size_t drops = masked ? spec.drops_for(B) : 0;
  const std::vector<BlockMask> all_masks =
      (spec.kind == GuidanceKind::NaiveS2 && spec.exhaustive) ? enumerate_all_masks(B, drops)
                                                              : std::vector<BlockMask>{};

  std::vector<Rng> chains;
  chains.reserve(n);
  for (std::size_t i = 0; i < n; ++i) chains.push_back(rng.split("chain", i));
  Rng mask_rng = rng.split("masks");

  Matrix x(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) x(i, d) = chains[i].normal();

  SamplingResult result;
  const std::size_t rec = std::min(opts.record_chains, n);
  result.trajectories.resize(rec);
  for (std::size_t i = 0; i < rec; ++i) {
    auto& tr = result.trajectories[i];
    tr.states = Matrix(static_cast<std::size_t>(T) + 1, dim);
    std::copy(x.row(i).begin(), x.row(i).end(), tr.states.row(0).begin());
  }

  const ClassLabel cond = opts.label;
  for (int t = T; t >= 1; --t) {
    std::vector<BlockMask> masks;
    if (spec.kind == GuidanceKind::S2) {
      masks.push_back(generate_mask_with_count(B, drops, mask_rng));
    } else if (spec.kind == GuidanceKind::NaiveS2) {
      if (spec.exhaustive) {
        masks = all_masks;
      } else {
        for (int i = 0; i < spec.n_subnets; ++i)
          masks.push_back(generate_mask_with_count(B, drops, mask_rng));
      }
    }

    auto forward = [&](ClassLabel c, const BlockMask* m) {
      ++result.calls.strong;
      return predict_rows(net, x, t, c, m, opts.threads);
    };

    Matrix d_uncond, d_cond, d_weak, d_tilde(n, dim);
    switch (spec.kind) {
      case GuidanceKind::Unguided:
        d_cond = forward(cond, nullptr);
        d_tilde = d_cond;
        break;
      case GuidanceKind::CFG:
        d_uncond = forward(ClassLabel::null(), nullptr);
        d_cond = forward(cond, nullptr);
        d_tilde.data() = cfg_combine(d_uncond.data(), d_cond.data(), spec.lambda);
        break;
      case GuidanceKind::Autoguidance:
        d_cond = forward(cond, nullptr);
        ++result.calls.weak;
        d_weak = predict_rows(*weak_model, x, t, cond, nullptr, opts.threads);
        d_tilde.data() = autoguidance_combine(d_weak.data(), d_cond.data(), spec.ag_scale);
        break;
      case GuidanceKind::S2:
        d_uncond = forward(ClassLabel::null(), nullptr);
        d_cond = forward(cond, nullptr);
        d_weak = forward(cond, &masks.front());
        d_tilde.data() = s2_combine(d_uncond.data(), d_cond.data(), d_weak.data(),
                                    spec.lambda, spec.omega);
        break;
      case GuidanceKind::NaiveS2: {
        d_uncond = forward(ClassLabel::null(), nullptr);
        d_cond = forward(cond, nullptr);
        std::vector<Vector> weak_list;
        weak_list.reserve(masks.size());
        for (const auto& m : masks) weak_list.push_back(forward(cond, &m).data());
        d_tilde.data() = naive_s2_combine(d_uncond.data(), d_cond.data(), weak_list,
                                          spec.lambda, spec.omega);
        if (opts.record_terms) {
          d_weak = Matrix(n, dim, 0.0);
          for (const auto& w : weak_list)
            for (std::size_t i = 0; i < w.size(); ++i) d_weak.data()[i] += w[i];
          for (auto& v : d_weak.data()) v /= static_cast<double>(weak_list.size());
        }
        break;
      }
    }

    const auto k = coefficients(t, sched, opts.mode);
    const bool noisy = opts.mode == SamplingMode::Ancestral && t > 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = k.x_coef * x(i, d) + k.d_coef * d_tilde(i, d);
        if (noisy) v += k.noise_sd * chains[i].normal();
        if (!std::isfinite(v))
          throw DivergenceError("run_sampling: non-finite state at t=" + std::to_string(t));
        x(i, d) = v;
      }
    }

    const auto row = static_cast<std::size_t>(T - t + 1);
    for (std::size_t i = 0; i < rec; ++i) {
      auto& tr = result.trajectories[i];
      std::copy(x.row(i).begin(), x.row(i).end(), tr.states.row(row).begin());
      if (masked) tr.masks_used.push_back(masks);
      if (opts.record_terms) {
        auto pick = [&](const Matrix& m) {
          return m.empty() ? Vector{} : Vector(m.row(i).begin(), m.row(i).end());
        };
        tr.terms.push_back({pick(d_uncond), pick(d_cond), pick(d_weak), pick(d_tilde)});
      }
    }
  }

  result.samples.points = std::move(x);
  result.samples.labels.assign(n, cond.id());
  return result;
}

}  // namespace s2g
