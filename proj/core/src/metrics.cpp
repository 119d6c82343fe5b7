#include "s2g/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "s2g/error.hpp"
#include "s2g/oracle.hpp"
#include "s2g/stats.hpp"

namespace s2g::metrics {

namespace {

void require_1d(const SampleBatch& b, const char* who) {
  if (b.dim() != 1) throw DimensionError(std::string(who) + ": expected 1-D samples");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Integral of |F_a - F_b| for sorted inputs of any sizes.
double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw ValueError("wasserstein1: empty batch");
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double x = std::min(a[0], b[0]);
  double acc = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) next = a[i];
    else next = b[j];
    acc += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
  }
  return acc;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

}  // namespace

double wasserstein1_1d(const SampleBatch& a, const SampleBatch& b) {
  require_1d(a, "wasserstein1_1d");
  require_1d(b, "wasserstein1_1d");
  return w1_sorted(sorted_copy(a.points.data()), sorted_copy(b.points.data()));
}

double wasserstein1_1d(const SampleBatch& a, const GaussianMixture& gmm) {
  require_1d(a, "wasserstein1_1d");
  if (gmm.dim() != 1) throw DimensionError("wasserstein1_1d: mixture must be 1-D");
  if (a.size() == 0) throw ValueError("wasserstein1: empty batch");
  const auto s = sorted_copy(a.points.data());
  constexpr std::size_t grid = std::size_t{1} << 14;
  const double n = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
    const auto idx = std::min(s.size() - 1, static_cast<std::size_t>(std::floor(u * n)));
    acc += std::abs(s[idx] - oracle::quantile_1d(gmm, u));
  }
  return acc / static_cast<double>(grid);
}

double kde_peak(std::span<const double> values) {
  if (values.empty()) throw ValueError("kde_peak: empty input");
  const auto s = sorted_copy(values);
  const double n = static_cast<double>(s.size());
  const double sd = stats::stddev(s);
  const double iqr = stats::quantile(s, 0.75) - stats::quantile(s, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0) || s.front() == s.back()) return s.front();  // all samples coincide

  constexpr std::size_t grid = std::size_t{1} << 12;
  const double lo = s.front() - 1.0;
  const double hi = s.back() + 1.0;
  const double step = (hi - lo) / static_cast<double>(grid - 1);
  // never narrower than the grid, or no node would see a sample
  const double h = std::max(0.9 * spread * std::pow(n, -0.2), step);
  const double reach = 8.0 * h;
  double best = -1.0, best_x = lo;
  std::size_t first = 0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double x = lo + step * static_cast<double>(g);
    while (first < s.size() && s[first] < x - reach) ++first;
    double dens = 0.0;
    for (std::size_t i = first; i < s.size() && s[i] <= x + reach; ++i) {
      const double z = (x - s[i]) / h;
      dens += std::exp(-0.5 * z * z);
    }
    if (dens > best) {
      best = dens;
      best_x = x;
    }
  }
  return best_x;
}

double mode_shift(const SampleBatch& samples, const GaussianMixture& gmm, std::size_t cls) {
  if (samples.size() == 0) throw ValueError("mode_shift: empty batch");
  if (samples.dim() != gmm.dim()) throw DimensionError("mode_shift: dimension mismatch");
  const auto& mu = gmm[cls].mean;
  if (gmm.dim() == 1) return kde_peak(samples.points.data()) - mu[0];
  const double norm = std::sqrt(dot(mu, mu));
  Vector dir(mu.size(), 0.0);
  if (norm > 0.0) {
    for (std::size_t d = 0; d < mu.size(); ++d) dir[d] = mu[d] / norm;
  } else {
    dir[0] = 1.0;
  }
  std::vector<double> proj(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) proj[i] = dot(samples.points.row(i), dir);
  return kde_peak(proj) - norm;
}

Coverage mode_coverage(const SampleBatch& samples, const GaussianMixture& gmm, double radius) {
  if (!(radius > 0.0)) throw ValueError("mode_coverage: radius must be positive");
  if (samples.size() > 0 && samples.dim() != gmm.dim())
    throw DimensionError("mode_coverage: dimension mismatch");
  Coverage cov;
  cov.counts.assign(gmm.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < gmm.size(); ++k) {
      const double dist = distance(samples.points.row(i), gmm[k].mean);
      if (dist < best) {
        best = dist;
        arg = k;
      }
    }
    if (best <= radius) ++cov.counts[arg];
    else ++cov.unassigned_count;
  }
  const double n = static_cast<double>(std::max<std::size_t>(samples.size(), 1));
  double assigned = 0.0;
  for (auto c : cov.counts) {
    cov.fractions.push_back(static_cast<double>(c) / n);
    assigned += cov.fractions.back();
  }
  cov.unassigned = samples.size() == 0 ? 0.0 : 1.0 - assigned;
  return cov;
}

double sliced_wasserstein(const SampleBatch& a, const SampleBatch& b,
                          std::size_t n_projections, Rng rng) {
  if (a.dim() != b.dim()) throw DimensionError("sliced_wasserstein: dimension mismatch");
  if (n_projections == 0) throw ValueError("sliced_wasserstein: need at least one projection");
  const std::size_t dim = a.dim();
  if (dim == 1) return wasserstein1_1d(a, b);
  double acc = 0.0;
  for (std::size_t p = 0; p < n_projections; ++p) {
    Vector dir = rng.normal_vector(dim);
    const double norm = std::sqrt(dot(dir, dir));
    for (auto& v : dir) v /= norm;
    std::vector<double> pa(a.size()), pb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = dot(a.points.row(i), dir);
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = dot(b.points.row(i), dir);
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    acc += w1_sorted(pa, pb);
  }
  return acc / static_cast<double>(n_projections);
}

double hist_kl(const SampleBatch& a, const GaussianMixture& gmm, std::size_t bins) {
  if (bins == 0) throw ValueError("hist_kl: bins must be >= 1");
  if (a.size() == 0) throw ValueError("hist_kl: empty batch");
  if (a.dim() != gmm.dim()) throw DimensionError("hist_kl: dimension mismatch");
  const std::size_t dim = gmm.dim();
  Vector lo(dim, std::numeric_limits<double>::infinity());
  Vector hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& c : gmm.components())
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(c.variance[d]);
      lo[d] = std::min(lo[d], c.mean[d] - 5.0 * sd);
      hi[d] = std::max(hi[d], c.mean[d] + 5.0 * sd);
    }
  auto edge = [&](std::size_t d, std::size_t j) {
    if (j == 0) return -std::numeric_limits<double>::infinity();
    if (j == bins) return std::numeric_limits<double>::infinity();
    return lo[d] + (hi[d] - lo[d]) * static_cast<double>(j) / static_cast<double>(bins);
  };
  const std::size_t cells = dim == 1 ? bins : bins * bins;
  std::vector<double> q(cells, 0.0);
  for (const auto& c : gmm.components()) {
    std::vector<std::vector<double>> axis(dim, std::vector<double>(bins));
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(c.variance[d]);
      for (std::size_t j = 0; j < bins; ++j)
        axis[d][j] = stats::normal_cdf((edge(d, j + 1) - c.mean[d]) / sd) -
                     stats::normal_cdf((edge(d, j) - c.mean[d]) / sd);
    }
    for (std::size_t cell = 0; cell < cells; ++cell) {
      double m = c.weight * axis[0][cell % bins];
      if (dim == 2) m *= axis[1][cell / bins];
      q[cell] += m;
    }
  }
  std::vector<std::size_t> counts(cells, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t cell = 0, stride = 1;
    for (std::size_t d = 0; d < dim; ++d) {
      const double pos = (a.points(i, d) - lo[d]) / (hi[d] - lo[d]) * static_cast<double>(bins);
      const auto j = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(bins - 1)));
      cell += j * stride;
      stride *= bins;
    }
    ++counts[cell];
  }
  const double n = static_cast<double>(a.size());
  double kl = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (counts[cell] == 0) continue;
    const double p = static_cast<double>(counts[cell]) / n;
    kl += p * std::log(p / std::max(q[cell], 1e-300));
  }
  return std::max(kl, 0.0);
}

double cluster_separation(const SampleBatch& labeled) {
  if (labeled.labels.size() != labeled.size())
    throw ValueError("cluster_separation: labels and points differ in length");
  std::set<int> ids(labeled.labels.begin(), labeled.labels.end());
  if (ids.size() < 2) throw ValueError("cluster_separation: need at least two classes");
  const std::size_t dim = labeled.dim();
  std::vector<Vector> centroids;
  double intra = 0.0;
  for (int id : ids) {
    // Sorted rows make every sum independent of the input order.
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < labeled.size(); ++i)
      if (labeled.labels[i] == id) rows.emplace_back(labeled.points.row(i).begin(), labeled.points.row(i).end());
    std::sort(rows.begin(), rows.end());
    Vector c(dim, 0.0);
    for (const auto& r : rows)
      for (std::size_t d = 0; d < dim; ++d) c[d] += r[d];
    for (auto& v : c) v /= static_cast<double>(rows.size());
    std::vector<double> dists;
    for (const auto& r : rows) dists.push_back(distance(r, c));
    std::sort(dists.begin(), dists.end());
    for (double v : dists) intra += v;
    centroids.push_back(std::move(c));
  }
  intra /= static_cast<double>(labeled.size());
  double inter = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i)
    for (std::size_t j = i + 1; j < centroids.size(); ++j, ++pairs) inter += distance(centroids[i], centroids[j]);
  inter /= static_cast<double>(pairs);
  if (!(intra > 0.0)) throw ValueError("cluster_separation: zero intra-cluster spread");
  return inter / intra;
}

GaussianMixture reference_for(const SampleBatch& samples, const GaussianMixture& gmm) {
  if (samples.labels.size() != samples.size())
    throw ValueError("reference_for: labels and points differ in length");
  std::vector<std::size_t> counts(gmm.size(), 0);
  for (int l : samples.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= gmm.size())
      throw ValueError("reference_for: label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  std::vector<Component> comps;
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    if (counts[k] == 0) continue;
    Component c = gmm[k];
    c.weight = static_cast<double>(counts[k]) / static_cast<double>(samples.size());
    comps.push_back(std::move(c));
  }
  if (comps.empty()) throw ValueError("reference_for: empty batch");
  // Re-normalise so the weight sum is exact to the mixture's tolerance.
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return GaussianMixture(std::move(comps));
}

MetricsReport evaluate(const SampleBatch& samples, const GaussianMixture& gmm,
                       const EvalOptions& options) {
  samples.validate(gmm.size());
  if (samples.dim() != gmm.dim()) throw DimensionError("evaluate: dimension mismatch");
  MetricsReport r;
  const GaussianMixture ref = reference_for(samples, gmm);
  if (gmm.dim() == 1) {
    r.wasserstein1 = wasserstein1_1d(samples, ref);
  } else {
    Rng rng = Rng(options.seed).split("eval-reference");
    // same class proportions as the samples, so label noise does not count
    const SampleBatch truth = oracle::sample_stratified(ref, options.reference_n, rng);
    r.sliced_w = sliced_wasserstein(samples, truth, options.projections,
                                    Rng(options.seed).split("eval-projections"));
  }
  std::set<int> ids(samples.labels.begin(), samples.labels.end());
  for (int id : ids)
    r.mode_shift[id] = mode_shift(samples.with_label(id), gmm, static_cast<std::size_t>(id));
  const Coverage cov = mode_coverage(samples, gmm, options.radius);
  r.mode_coverage = cov.fractions;
  r.unassigned = cov.unassigned;
  r.hist_kl = hist_kl(samples, ref, options.bins);
  if (gmm.dim() == 2 && ids.size() >= 2) r.cluster_separation = cluster_separation(samples);
  return r;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  if (report.wasserstein1) j["wasserstein1"] = *report.wasserstein1;
  if (report.sliced_w) j["sliced_w"] = *report.sliced_w;
  nlohmann::ordered_json shift = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.mode_shift) shift[std::to_string(k)] = v;
  j["mode_shift"] = shift;
  j["mode_coverage"] = report.mode_coverage;
  j["unassigned"] = report.unassigned;
  j["hist_kl"] = report.hist_kl;
  if (report.cluster_separation) j["cluster_separation"] = *report.cluster_separation;
  return j.dump(2);
}

MetricsReport report_from_json(const std::string& text) {
  MetricsReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("wasserstein1")) r.wasserstein1 = j.at("wasserstein1").get<double>();
    if (j.contains("sliced_w")) r.sliced_w = j.at("sliced_w").get<double>();
    for (const auto& [k, v] : j.at("mode_shift").items()) r.mode_shift[std::stoi(k)] = v.get<double>();
    r.mode_coverage = j.at("mode_coverage").get<std::vector<double>>();
    r.unassigned = j.at("unassigned").get<double>();
    r.hist_kl = j.at("hist_kl").get<double>();
    if (j.contains("cluster_separation"))
      r.cluster_separation = j.at("cluster_separation").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("metrics json", 0, e.what());
  }
  return r;
}

std::vector<std::string> csv_columns(std::size_t num_classes) {
  std::vector<std::string> cols{"wasserstein1", "sliced_w"};
  for (std::size_t k = 0; k < num_classes; ++k) cols.push_back("mode_shift_" + std::to_string(k));
  for (std::size_t k = 0; k < num_classes; ++k) cols.push_back("coverage_" + std::to_string(k));
  cols.insert(cols.end(), {"unassigned", "hist_kl", "cluster_separation"});
  return cols;
}

std::vector<double> csv_values(const MetricsReport& report, std::size_t num_classes) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> v{report.wasserstein1.value_or(nan), report.sliced_w.value_or(nan)};
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto it = report.mode_shift.find(static_cast<int>(k));
    v.push_back(it == report.mode_shift.end() ? nan : it->second);
  }
  for (std::size_t k = 0; k < num_classes; ++k)
    v.push_back(k < report.mode_coverage.size() ? report.mode_coverage[k] : nan);
  v.push_back(report.unassigned);
  v.push_back(report.hist_kl);
  v.push_back(report.cluster_separation.value_or(nan));
  return v;
}

}  // namespace s2g::metrics
