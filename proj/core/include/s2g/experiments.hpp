#pragma once

#include <map>
#include <string>
#include <vector>

#include "s2g/commands.hpp"

namespace s2g {

/// fig3_1d, fig3_2d, fig8_traj, fig9_naive_vs_s2, ablations.
const std::vector<std::string>& repro_experiments();

/// The pinned configuration an experiment runs with (before --seed).
ExperimentConfig repro_config(const std::string& name);

struct ReproResult {
  std::vector<std::string> files;  // relative to ctx.out_dir, in write order
  std::map<std::string, metrics::MetricsReport> metrics;
  std::map<std::string, CallCounts> calls;
  std::map<std::string, double> scalars;  // experiment-specific numbers
};

/// Runs a named experiment end to end into ctx.out_dir, training (and
/// caching under ctx.cache_dir, default `<out>/cache`) any missing model.
/// Throws ConfigError on an unknown name.
ReproResult cmd_repro(const std::string& name, const CommandContext& ctx);

/// Mean squared difference between the full network and each masked
/// sub-network with `drops` blocks removed, averaged over every such mask
/// and over the probes. Index = drop count, 0 .. B-1.
std::vector<double> subnetwork_deviation(const BlockDenoiser& net, const ProbeSet& probes);

}  // namespace s2g
