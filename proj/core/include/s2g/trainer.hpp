#pragma once

#include <cstdint>
#include <vector>

#include "s2g/denoiser.hpp"
#include "s2g/mixture.hpp"
#include "s2g/schedule.hpp"

namespace s2g {

struct TrainConfig {
  int steps = 20000;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double cond_drop_prob = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int log_every = 100;

  void validate() const;
  /// Hash over every field, recorded in checkpoints.
  std::uint64_t hash() const;
};

struct LossPoint {
  int step;
  double loss;  // mean batch loss over the window ending at `step`
};

struct TrainResult {
  BlockDenoiser net;
  std::vector<LossPoint> curve;
};

/// A freshly initialized network, seeded from cfg.seed's "init" stream.
BlockDenoiser init_network(const DenoiserTopology& topo, std::uint64_t seed);

/// Noise-prediction training with condition dropout and Adam.
///
/// Each step draws a batch (x_0, class) from `data`, replaces the class with
/// the null token with probability cond_drop_prob, draws t uniformly in
/// [1, T] and eps ~ N(0, I), and descends mean ||eps_hat - eps||^2 over
/// batch and coordinates. Throws DivergenceError on a non-finite loss.
TrainResult train(const GaussianMixture& data, BlockDenoiser net,
                  const NoiseSchedule& sched, const TrainConfig& cfg);

/// Degraded model for the Autoguidance baseline: hidden width scaled by
/// capacity_factor, step count by step_factor (both in (0, 1]), everything
/// else as in train() from init_network(topo', cfg.seed).
TrainResult train_weak(const GaussianMixture& data, const DenoiserTopology& topo,
                       const NoiseSchedule& sched, const TrainConfig& cfg,
                       double capacity_factor, double step_factor);

/// Fixed held-out (t, x_t, c, eps) probes.
struct ProbeSet {
  Matrix x;
  std::vector<int> t;
  std::vector<ClassLabel> c;
  Matrix eps;

  std::size_t size() const noexcept { return t.size(); }
};

ProbeSet make_probe_set(const GaussianMixture& data, const NoiseSchedule& sched,
                        std::size_t n, std::uint64_t seed);

/// Mean squared noise error of `net` over the probes (per coordinate).
double heldout_mse(const BlockDenoiser& net, const ProbeSet& probes);

/// The same error for the closed-form posterior-mean predictor: the lowest
/// value any predictor can reach in expectation.
double bayes_floor(const GaussianMixture& data, const NoiseSchedule& sched,
                   const ProbeSet& probes);

}  // namespace s2g
