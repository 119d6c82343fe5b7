#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "s2g/config.hpp"
#include "s2g/denoiser.hpp"
#include "s2g/metrics.hpp"
#include "s2g/sampler.hpp"

namespace s2g {

/// Options shared by every subcommand.
struct CommandContext {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides train.seed and sampling.seed
  std::optional<std::size_t> threads;
  std::string cache_dir;    // trained models keyed by content; empty disables
  std::string checkpoint;   // explicit model path, wins over the config
  std::ostream* log = nullptr;
};

/// The config with the context's seed and thread overrides applied.
ExperimentConfig apply_overrides(ExperimentConfig config, const CommandContext& ctx);

struct Models {
  BlockDenoiser net;
  std::optional<BlockDenoiser> weak;
  std::string net_hash;   // content hash of the encoded checkpoint
  std::string weak_hash;
};

/// Key of the trained main model: hash over data, model, schedule and train
/// sections. The weak key also covers the weak-model factors.
std::string model_key(const ExperimentConfig& config);
std::string weak_model_key(const ExperimentConfig& config);

/// Loads models from (in order) ctx.checkpoint, config.checkpoint,
/// `<cache_dir>/<key>.ckpt`; trains and caches when nothing is found and
/// `train_if_missing` is set, else throws IoError. The weak model is loaded
/// only when `need_weak` is set.
Models obtain_models(const ExperimentConfig& config, const CommandContext& ctx,
                     bool train_if_missing, bool need_weak);

/// Samples `config.sampling.n` points: all of one class when sampling.label
/// is set, otherwise split evenly over the classes (class k draws from
/// Rng(seed).split("class", k)). Call counts add up over the classes.
SamplingResult sample_configured(const ExperimentConfig& config, const Models& models,
                                 const GuidanceSpec& spec);

struct TrainOutput {
  std::string checkpoint;
  std::string weak_checkpoint;  // empty when no guidance needs it
};

/// Writes model.ckpt, loss.csv (and weak.ckpt, weak_loss.csv) and
/// manifest.json into ctx.out_dir.
TrainOutput cmd_train(const ExperimentConfig& config, const CommandContext& ctx);

/// Writes samples.csv, trajectories.csv when sampling.record_chains > 0,
/// and manifest.json.
SamplingResult cmd_sample(const ExperimentConfig& config, const CommandContext& ctx,
                          const std::string& guidance_name);

/// Evaluates a samples CSV. The manifest.json next to it must carry the
/// config's hash, otherwise ConfigError. Writes metrics.json, metrics.csv
/// and manifest.json into ctx.out_dir.
metrics::MetricsReport cmd_eval(const std::string& samples_path, const ExperimentConfig& config,
                                const CommandContext& ctx);

enum class SweepAxis { Lambda, Omega, DropCount, NSubnets };
SweepAxis parse_sweep_axis(const std::string& text);
std::string_view to_string(SweepAxis axis) noexcept;

/// `spec` with one field replaced. Throws ConfigError when the axis does
/// not apply to the spec's kind.
GuidanceSpec with_axis_value(const GuidanceSpec& spec, SweepAxis axis, double value);

struct SweepRow {
  double value;
  metrics::MetricsReport report;
  CallCounts calls;
};

/// For each value in order: sample with the same seeds, evaluate, record.
/// Writes sweep.csv (columns axis,value,metric,score; one row per value per
/// metric) and manifest.json.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config, const CommandContext& ctx,
                                const std::string& guidance_name, SweepAxis axis,
                                const std::vector<double>& values);

/// Renders a plot spec file. A relative output path resolves against
/// ctx.out_dir. Returns the written path.
std::string cmd_plot(const std::string& spec_path, const CommandContext& ctx);

}  // namespace s2g
