#pragma once

#include <optional>
#include <string>
#include <vector>

#include "s2g/mixture.hpp"
#include "s2g/sample_batch.hpp"
#include "s2g/sampler.hpp"

namespace s2g::plot {

enum class PlotKind { Hist1d, Scatter2d, Trajectories };

PlotKind parse_plot_kind(std::string_view text);
std::string_view to_string(PlotKind kind) noexcept;

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

/// What to draw. Hist1d and Scatter2d produce one panel per input file
/// (left to right); Trajectories takes a single trajectory CSV.
struct PlotSpec {
  PlotKind kind = PlotKind::Hist1d;
  std::vector<std::string> inputs;
  std::vector<std::string> panel_titles;  // optional, one per input
  std::optional<GaussianMixture> overlay;  // ground-truth density (Hist1d)
  std::optional<Range> x_range;
  std::optional<Range> y_range;
  std::size_t bins = 80;
  std::string title;
  std::string output;
};

/// Parses a plot spec file (JSON object with keys kind, inputs,
/// panel_titles, overlay, x_range, y_range, bins, title, output).
PlotSpec plot_spec_from_json(const std::string& text);

struct HistPanel {
  std::string title;
  std::vector<double> values;
};

struct ScatterPanel {
  std::string title;
  SampleBatch samples;
};

/// Bin heights normalised so that sum(height * width) == 1 over the values
/// passed in. Values outside [lo, hi] fall in the edge bins.
std::vector<double> histogram_density(const std::vector<double>& values, double lo, double hi,
                                      std::size_t bins);

std::string render_hist1d(const std::vector<HistPanel>& panels, const std::optional<GaussianMixture>& overlay,
                          std::optional<Range> x_range, std::size_t bins, const std::string& title);
/// Every sample becomes one <circle>; coordinates are clamped into the axis box.
std::string render_scatter2d(const std::vector<ScatterPanel>& panels, std::optional<Range> x_range,
                             std::optional<Range> y_range, const std::string& title);
/// 1-D: x horizontally, timestep vertically with t = T at the top.
/// 2-D: paths in the plane.
std::string render_trajectories(const std::vector<Trajectory>& trajectories, int T,
                                std::optional<Range> x_range, std::optional<Range> y_range,
                                const std::string& title);

/// Reads the spec's CSV inputs and renders them. The result is fully
/// determined by the inputs.
std::string render(const PlotSpec& spec);

}  // namespace s2g::plot
