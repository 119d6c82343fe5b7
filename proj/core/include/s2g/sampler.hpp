#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s2g/guidance.hpp"
#include "s2g/predictor.hpp"
#include "s2g/rng.hpp"
#include "s2g/sample_batch.hpp"
#include "s2g/schedule.hpp"

namespace s2g {

enum class SamplingMode { Ancestral, Deterministic };

std::string_view to_string(SamplingMode mode) noexcept;
SamplingMode parse_sampling_mode(std::string_view text);

/// One reverse step from x_t to x_{t-1} using `d_tilde` as the noise
/// estimate. Requires t >= 1.
///
/// Ancestral (DDPM posterior):
///   x_{t-1} = (x_t - beta_t / sigma_t * d) / sqrt(alpha_t) + sqrt(beta~_t) z,
///   beta~_t = beta_t (1 - ab_{t-1}) / (1 - ab_t), no noise drawn at t = 1.
/// Deterministic (DDIM, eta = 0):
///   x0 = (x_t - sigma_t d) / sqrt(ab_t),  x_{t-1} = sqrt(ab_{t-1}) x0 + sigma_{t-1} d.
Vector scheduler_step(std::span<const double> d_tilde, std::span<const double> x_t,
                      int t, const NoiseSchedule& sched, SamplingMode mode, Rng& rng);

/// Per-step record of the predictions that formed d_tilde (chain-local).
struct GuidanceTerms {
  Vector d_uncond;  // empty when the strategy has no unconditional branch
  Vector d_cond;
  Vector d_weak;    // masked mean for S2 variants, weak model for Autoguidance
  Vector d_tilde;
};

struct Trajectory {
  Matrix states;  // (T + 1) x dim, row 0 is x_T, row T is x_0
  std::vector<std::vector<BlockMask>> masks_used;  // per step, S2 variants only
  std::vector<GuidanceTerms> terms;                // per step, when requested
};

struct CallCounts {
  std::size_t strong = 0;  // forwards of the main network (masked ones included)
  std::size_t weak = 0;    // forwards of a separate weak model
  std::size_t total() const noexcept { return strong + weak; }
};

struct SamplingOptions {
  std::size_t n = 1;
  ClassLabel label = ClassLabel(0);
  SamplingMode mode = SamplingMode::Ancestral;
  std::size_t record_chains = 0;  // trajectories kept for chains [0, record_chains)
  bool record_terms = false;
  std::size_t threads = 1;        // rows split across threads; results unchanged
};

struct SamplingResult {
  SampleBatch samples;
  std::vector<Trajectory> trajectories;
  CallCounts calls;
};

/// The guided reverse loop, for t = T .. 1:
///   - S2: one stochastic mask, forwards (uncond, cond, masked cond),
///     s2_combine, scheduler step
///   - NaiveS2: N masks (or all C(B, k) when exhaustive), N masked forwards
///   - CFG: uncond and cond forwards; Unguided: cond only
///   - Autoguidance: cond on `net` and cond on `weak_model`
///
/// Randomness: chain i draws x_T and its ancestral noise from
/// rng.split("chain", i); masks come from rng.split("masks"), one draw per
/// timestep shared by every chain. Throws ValueError when the spec needs a
/// weak model or maskable blocks that are missing, and DivergenceError if a
/// state leaves the finite range.
SamplingResult run_sampling(const NoisePredictor& net, const NoiseSchedule& sched,
                            const GuidanceSpec& spec, const SamplingOptions& opts,
                            const Rng& rng, const NoisePredictor* weak_model = nullptr);

/// predict() with rows split into contiguous chunks across `threads` threads.
Matrix predict_rows(const NoisePredictor& net, const Matrix& x, int t, ClassLabel c,
                    const BlockMask* mask, std::size_t threads);

}  // namespace s2g
