#include "s2g/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "s2g/error.hpp"

namespace {

using namespace s2g::stats;

TEST(Stats, Variance) {
  std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(variance(v), 4.0);
  EXPECT_DOUBLE_EQ(sample_variance(v), 32.0 / 7.0);
  EXPECT_DOUBLE_EQ(stddev(v), 2.0);
  EXPECT_THROW(sample_variance(std::vector<double>{1.0}), s2g::ValueError);
}

TEST(Stats, Quantile) {
  std::vector<double> v{5, 1, 3, 2, 4};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.125), 1.5);
  EXPECT_THROW(quantile(v, 1.5), s2g::ValueError);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), s2g::ValueError);
}

TEST(Stats, RanksWithTies) {
  std::vector<double> v{10, 20, 10, 30};
  EXPECT_EQ(ranks(v), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Stats, Correlations) {
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> sq{1, 4, 9, 16, 25};
  std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, sq), 1.0, 1e-15);
  EXPECT_NEAR(spearman(a, rev), -1.0, 1e-15);
  EXPECT_NEAR(pearson(a, a), 1.0, 1e-15);
  EXPECT_LT(pearson(a, sq), 1.0);
  EXPECT_THROW(pearson(a, std::vector<double>{1, 2}), s2g::DimensionError);
}

TEST(Stats, NormalFunctions) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(normal_cdf(-3.0), 0.0013498980316300946, 1e-17);
  EXPECT_NEAR(normal_pdf(0.0), 1.0 / std::sqrt(2.0 * M_PI), 1e-17);
}

}  // namespace
