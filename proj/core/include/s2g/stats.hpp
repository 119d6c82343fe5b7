#pragma once

#include <span>
#include <vector>

namespace s2g::stats {

/// Population variance (divides by n).
double variance(std::span<const double> values);
double sample_variance(std::span<const double> values);
double stddev(std::span<const double> values);

/// Linear-interpolated quantile of unsorted data, q in [0, 1].
double quantile(std::span<const double> values, double q);

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> ranks(std::span<const double> values);

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

double normal_cdf(double z) noexcept;
double normal_pdf(double z) noexcept;

}  // namespace s2g::stats
