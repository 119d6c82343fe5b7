#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2g/mixture.hpp"
#include "s2g/rng.hpp"
#include "s2g/sample_batch.hpp"

namespace s2g::metrics {

/// Exact empirical W1 between two 1-D batches. Equal sizes use the sorted
/// coupling mean |a_(i) - b_(i)|; unequal sizes integrate |F_a - F_b|.
double wasserstein1_1d(const SampleBatch& a, const SampleBatch& b);
/// W1 against a 1-D mixture: integral over u of |Q_a(u) - Q(u)| with the
/// midpoint rule on a 2^14 grid.
double wasserstein1_1d(const SampleBatch& a, const GaussianMixture& gmm);

/// Peak of a Gaussian KDE (Silverman bandwidth, 2^12 grid spanning the
/// sample range widened by 1 on each side).
double kde_peak(std::span<const double> values);

/// KDE peak minus the mean of component `cls`. In 2-D the samples are
/// projected on the unit vector through that mean, so a positive value means
/// outward for every mode. Throws ValueError on an empty batch.
double mode_shift(const SampleBatch& samples, const GaussianMixture& gmm, std::size_t cls);

struct Coverage {
  std::vector<std::size_t> counts;  // per component
  std::size_t unassigned_count = 0;
  std::vector<double> fractions;
  double unassigned = 0.0;
};

/// Each sample goes to the nearest component mean if that mean lies within
/// `radius`, otherwise to the unassigned bucket.
Coverage mode_coverage(const SampleBatch& samples, const GaussianMixture& gmm, double radius = 2.0);

/// Mean over `n_projections` random unit directions of the 1-D W1 between
/// the projected batches.
double sliced_wasserstein(const SampleBatch& a, const SampleBatch& b,
                          std::size_t n_projections, Rng rng);

/// KL(histogram of a || exact bin masses of gmm). `bins` per axis over the
/// mixture's +-5 sd envelope; points outside are clamped to the edge bins.
double hist_kl(const SampleBatch& a, const GaussianMixture& gmm, std::size_t bins);

/// Mean distance between class centroids divided by mean distance of a
/// point to its own centroid. Needs at least two labels present.
double cluster_separation(const SampleBatch& labeled);

/// The mixture reweighted by the label frequencies seen in `samples`.
GaussianMixture reference_for(const SampleBatch& samples, const GaussianMixture& gmm);

struct MetricsReport {
  std::optional<double> wasserstein1;  // 1-D
  std::optional<double> sliced_w;      // 2-D
  std::map<int, double> mode_shift;
  std::vector<double> mode_coverage;
  double unassigned = 0.0;
  double hist_kl = 0.0;
  std::optional<double> cluster_separation;  // labeled 2-D with >= 2 classes
};

struct EvalOptions {
  double radius = 2.0;
  std::size_t bins = 60;
  std::size_t projections = 64;
  std::size_t reference_n = 10000;
  std::uint64_t seed = 0;
};

MetricsReport evaluate(const SampleBatch& samples, const GaussianMixture& gmm,
                       const EvalOptions& options = {});

std::string to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);

/// Flat column names and values for sweep tables. `num_classes` fixes the
/// per-class and per-mode columns.
std::vector<std::string> csv_columns(std::size_t num_classes);
std::vector<double> csv_values(const MetricsReport& report, std::size_t num_classes);

}  // namespace s2g::metrics
