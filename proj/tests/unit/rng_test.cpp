#include "s2g/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_set>

#include "s2g/error.hpp"

namespace {

// Textbook SplitMix64, written out independently of the library.
struct RefSplitMix {
  std::uint64_t s;
  std::uint64_t next() {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

TEST(Rng, PublishedSeedZeroValues) {
  s2g::Rng r(0);
  EXPECT_EQ(r.next_u64(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(r.next_u64(), 0x6E789E6AA1B965F4ull);
}

TEST(Rng, MatchesReferenceStream) {
  for (std::uint64_t seed : {1ull, 42ull, 0xDEADBEEFull, ~0ull}) {
    s2g::Rng r(seed);
    RefSplitMix ref{seed};
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(r.next_u64(), ref.next());
  }
}

TEST(Rng, UniformUsesTop53Bits) {
  s2g::Rng r(7);
  RefSplitMix ref{7};
  for (int i = 0; i < 100; ++i) {
    double expect = static_cast<double>(ref.next() >> 11) * 0x1p-53;
    ASSERT_EQ(r.uniform(), expect);
  }
}

TEST(Rng, BoxMullerPairs) {
  s2g::Rng r(11);
  RefSplitMix ref{11};
  for (int i = 0; i < 50; ++i) {
    double u1 = static_cast<double>(ref.next() >> 11) * 0x1p-53;
    double u2 = static_cast<double>(ref.next() >> 11) * 0x1p-53;
    double rad = std::sqrt(-2.0 * std::log(1.0 - u1));
    double a = 2.0 * M_PI * u2;
    EXPECT_NEAR(r.normal(), rad * std::cos(a), 1e-15 * (1 + rad));
    EXPECT_NEAR(r.normal(), rad * std::sin(a), 1e-15 * (1 + rad));
  }
}

TEST(GaussDraw, Reproducible) {
  s2g::Rng a(0), b(0);
  auto x = s2g::gauss_draw(a, 2);
  auto y = s2g::gauss_draw(b, 2);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_TRUE(std::isfinite(x[0]) && std::isfinite(x[1]));
  EXPECT_EQ(x, y);
}

TEST(GaussDraw, Moments) {
  s2g::Rng r(0);
  auto x = s2g::gauss_draw(r, 100000);
  double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double v = 0;
  for (double e : x) v += (e - m) * (e - m);
  v /= x.size();
  EXPECT_NEAR(m, 0.0, 0.02);
  EXPECT_NEAR(v, 1.0, 0.02);
}

TEST(GaussDraw, DistinctSeeds) {
  s2g::Rng a(1), b(2);
  EXPECT_NE(s2g::gauss_draw(a, 100), s2g::gauss_draw(b, 100));
}

TEST(GaussDraw, ZeroCountRejected) {
  s2g::Rng r(0);
  EXPECT_THROW(s2g::gauss_draw(r, 0), s2g::ValueError);
}

TEST(Rng, SplitLeavesParentAndIgnoresPosition) {
  s2g::Rng a(5), b(5);
  auto c1 = a.split("masks");
  b.next_u64();
  b.next_u64();
  auto c2 = b.split("masks");
  EXPECT_EQ(c1.next_u64(), c2.next_u64());
  s2g::Rng fresh(5);
  EXPECT_EQ(a.next_u64(), fresh.next_u64());
}

TEST(Rng, SplitStreamsDistinct) {
  // pairwise distinct outputs across a million draws from three children
  s2g::Rng root(2024);
  s2g::Rng kids[3] = {root.split("a"), root.split("b"), root.split("chain", 3)};
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(3'000'000);
  for (auto& k : kids)
    for (int i = 0; i < 1'000'000; ++i) ASSERT_TRUE(seen.insert(k.next_u64()).second);
}

TEST(Rng, IndexedSplitDiffers) {
  s2g::Rng root(3);
  EXPECT_NE(root.split("chain", 0).next_u64(), root.split("chain", 1).next_u64());
  EXPECT_NE(root.split("chain", 0).next_u64(), root.split("chain").next_u64());
}

TEST(Rng, UniformIntRange) {
  s2g::Rng r(9);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 60000; ++i) ++hits[r.uniform_int(6)];
  for (int h : hits) EXPECT_NEAR(h / 60000.0, 1.0 / 6, 0.01);
  EXPECT_THROW(r.uniform_int(0), s2g::ValueError);
}

}  // namespace
