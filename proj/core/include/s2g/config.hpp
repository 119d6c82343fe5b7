#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "s2g/denoiser.hpp"
#include "s2g/guidance.hpp"
#include "s2g/metrics.hpp"
#include "s2g/mixture.hpp"
#include "s2g/sampler.hpp"
#include "s2g/schedule.hpp"
#include "s2g/trainer.hpp"

namespace s2g {

struct WeakModelConfig {
  double capacity_factor = 0.25;
  double step_factor = 0.5;
};

struct SamplingConfig {
  std::size_t n = 10000;
  SamplingMode mode = SamplingMode::Ancestral;
  std::uint64_t seed = 0;
  std::optional<int> label;  // unset: n split evenly over all classes
  std::size_t record_chains = 0;
  std::size_t threads = 1;
};

struct PlotConfig {
  std::size_t bins = 80;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
};

/// The whole experiment. Parsed from JSON; see docs/config.md for the
/// grammar. Every section is optional and falls back to the defaults below.
struct ExperimentConfig {
  std::string name = "experiment";
  GaussianMixture data = GaussianMixture::bimodal_1d();
  std::vector<std::string> class_names;  // one per component
  DenoiserTopology model;
  int T = 200;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  TrainConfig train;
  WeakModelConfig weak;
  std::vector<std::pair<std::string, GuidanceSpec>> guidance;  // in file order
  SamplingConfig sampling;
  metrics::EvalOptions metrics;
  PlotConfig plot;
  std::string checkpoint;       // optional path to a trained model
  std::string weak_checkpoint;  // optional path to the Autoguidance weak model

  NoiseSchedule schedule() const { return NoiseSchedule::linear(T, beta_start, beta_end); }
  /// Throws ConfigError if `name` is not a guidance entry.
  const GuidanceSpec& guidance_named(const std::string& name) const;
  bool needs_weak_model() const;
  /// Cross-section checks: model dim and classes against the data, guidance
  /// against the block count, sampling label against the classes.
  void validate() const;
};

/// Throws ConfigError naming the offending key (dotted path) on any unknown
/// key, wrong type, or out-of-range value.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON with every default filled in. parse_config(to_json(c))
/// reproduces c.
std::string to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits. Ignores threads,
/// checkpoint paths and the run-size fields sampling.n, sampling.label and
/// sampling.record_chains.
std::string config_hash(const ExperimentConfig& config);

/// Built-in configurations: "toy1d" (two modes at +-4) and "toy2d" (four
/// modes at (+-4, +-4)).
ExperimentConfig default_config(const std::string& preset);

/// GuidanceSpec <-> JSON object text, used by configs and manifests.
std::string guidance_to_json(const GuidanceSpec& spec);

}  // namespace s2g
