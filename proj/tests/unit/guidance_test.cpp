#include "s2g/guidance.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "s2g/denoiser.hpp"
#include "s2g/error.hpp"
#include "s2g/trainer.hpp"

namespace {

using s2g::BlockMask;
using s2g::ClassLabel;
using s2g::GuidanceKind;
using s2g::GuidanceSpec;
using s2g::Matrix;
using s2g::Vector;

s2g::BlockDenoiser random_net(std::uint64_t seed) {
  s2g::DenoiserTopology t;
  t.dim = 2;
  t.hidden = 24;
  t.blocks = 6;
  t.num_classes = 4;
  s2g::Rng r(seed);
  std::vector<double> p(t.param_count());
  for (auto& e : p) e = 0.3 * r.normal();
  return s2g::BlockDenoiser(t, std::move(p));
}

TEST(Combine, CfgExamples) {
  Vector u{0.2}, c{0.6};
  EXPECT_EQ(s2g::cfg_combine(u, c, 1.0), c);
  EXPECT_EQ(s2g::cfg_combine(u, c, 0.0), u);
  EXPECT_NEAR(s2g::cfg_combine(u, c, 7.5)[0], 3.2, 1e-12);
  EXPECT_THROW(s2g::cfg_combine(u, Vector{1, 2}, 2.0), s2g::DimensionError);
}

TEST(Combine, S2Examples) {
  Vector u{0.2, -1.0}, c{0.6, 0.5}, w{0.5, 0.7};
  EXPECT_EQ(s2g::s2_combine(u, c, w, 7.5, 0.0), s2g::cfg_combine(u, c, 7.5));
  EXPECT_NEAR(s2g::s2_combine(u, c, w, 7.5, 0.25)[0], 3.075, 1e-12);
  Vector g = s2g::cfg_combine(u, c, 7.5);
  Vector cancel{g[0] / 0.25, g[1] / 0.25};
  auto z = s2g::s2_combine(u, c, cancel, 7.5, 0.25);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
  // lambda = 1, omega = 0 is the raw conditional prediction
  EXPECT_EQ(s2g::s2_combine(u, c, w, 1.0, 0.0), c);
}

TEST(Combine, NaiveExamples) {
  Vector u{0.2}, c{0.6}, w{0.5};
  EXPECT_EQ(s2g::naive_s2_combine(u, c, {w}, 3.0, 0.25), s2g::s2_combine(u, c, w, 3.0, 0.25));
  EXPECT_EQ(s2g::naive_s2_combine(u, c, {w, w, w, w}, 3.0, 0.25), s2g::s2_combine(u, c, w, 3.0, 0.25));
  EXPECT_THROW(s2g::naive_s2_combine(u, c, {}, 3.0, 0.25), s2g::ValueError);
  // mean of the list, then the S2 formula
  auto r = s2g::naive_s2_combine(u, c, {Vector{0.1}, Vector{0.3}, Vector{0.8}}, 2.0, 0.5);
  EXPECT_NEAR(r[0], -0.2 + 2.0 * 0.6 - 0.5 * 0.4, 1e-15);
}

TEST(Combine, AutoguidanceExamples) {
  Vector weak{0.3, -2.0}, strong{0.9, 1.0};
  EXPECT_EQ(s2g::autoguidance_combine(weak, strong, 1.0), strong);
  EXPECT_EQ(s2g::autoguidance_combine(weak, strong, 0.0), weak);
  auto r = s2g::autoguidance_combine(weak, strong, 2.0);
  EXPECT_NEAR(r[0], 0.3 + 2.0 * 0.6, 1e-15);
  EXPECT_NEAR(r[1], -2.0 + 2.0 * 3.0, 1e-15);
}

TEST(Combine, AffineInEachArgument) {
  s2g::Rng rng(4);
  auto rv = [&] { return Vector{rng.normal(), rng.normal()}; };
  for (int trial = 0; trial < 50; ++trial) {
    Vector u = rv(), c = rv(), w1 = rv(), w2 = rv();
    const double lam = 4 * rng.uniform(), om = rng.uniform(), a = rng.normal();
    Vector mix(2);
    for (int i = 0; i < 2; ++i) mix[i] = a * w1[i] + (1 - a) * w2[i];
    auto f = [&](const Vector& w) { return s2g::s2_combine(u, c, w, lam, om); };
    auto lhs = f(mix);
    auto r1 = f(w1), r2 = f(w2);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(lhs[i], a * r1[i] + (1 - a) * r2[i], 1e-12);
  }
}

TEST(Spec, ValidationAndAccounting) {
  auto s = GuidanceSpec::s2(3, 0.25);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.calls_per_step(6), 3u);
  EXPECT_EQ(s.drops_for(6), 1u);
  EXPECT_DOUBLE_EQ(s.coefficient_sum(), 0.75);
  EXPECT_EQ(GuidanceSpec::cfg(3).calls_per_step(6), 2u);
  EXPECT_EQ(GuidanceSpec::cfg(3).coefficient_sum(), 1.0);
  EXPECT_EQ(GuidanceSpec::unguided().calls_per_step(6), 1u);
  EXPECT_EQ(GuidanceSpec::autoguidance(2).calls_per_step(6), 2u);
  auto n = GuidanceSpec::naive_s2(3, 0.25, 20);
  EXPECT_EQ(n.calls_per_step(6), 22u);
  n.exhaustive = true;
  n.drop_count = 2;
  EXPECT_EQ(n.calls_per_step(6), 2u + 15u);
  n.drop_count = 6;
  EXPECT_THROW(n.drops_for(6), s2g::ValueError);

  auto bad = GuidanceSpec::s2(3, -0.1);
  EXPECT_THROW(bad.validate(), s2g::ValueError);
  bad = GuidanceSpec::naive_s2(3, 0.1, 0);
  EXPECT_THROW(bad.validate(), s2g::ValueError);
  bad = GuidanceSpec::cfg(std::nan(""));
  EXPECT_THROW(bad.validate(), s2g::ValueError);
  bad = GuidanceSpec::s2(3, 0.1, 1.0);
  EXPECT_THROW(bad.validate(), s2g::ValueError);
  bad = GuidanceSpec::autoguidance(2, "");
  EXPECT_THROW(bad.validate(), s2g::ValueError);

  EXPECT_EQ(s2g::parse_guidance_kind("naive_s2"), GuidanceKind::NaiveS2);
  EXPECT_EQ(s2g::to_string(GuidanceKind::S2), "s2");
  EXPECT_THROW(s2g::parse_guidance_kind("pag"), s2g::ValueError);
}

// Appendix-style identity at enumerable scale: averaging the single-mask
// combination over every mask equals the naive combination over all masks.
TEST(Masks, ExhaustiveUnbiasedness) {
  auto net = random_net(1);
  s2g::Rng rng(2);
  Matrix x(1, 2);
  const auto masks = s2g::enumerate_all_masks(6, 1);
  double worst = 0;
  for (int probe = 0; probe < 100; ++probe) {
    x(0, 0) = 4 * rng.normal();
    x(0, 1) = 4 * rng.normal();
    const int t = 1 + static_cast<int>(rng.uniform_int(200));
    const ClassLabel c(static_cast<int>(rng.uniform_int(4)));
    const Vector du = net.predict(x, t, ClassLabel::null()).data();
    const Vector dc = net.predict(x, t, c).data();
    std::vector<Vector> weak;
    Vector avg(2, 0.0);
    for (const auto& m : masks) {
      weak.push_back(net.predict(x, t, c, &m).data());
      auto s = s2g::s2_combine(du, dc, weak.back(), 3.0, 0.25);
      for (int i = 0; i < 2; ++i) avg[i] += s[i] / masks.size();
    }
    auto naive = s2g::naive_s2_combine(du, dc, weak, 3.0, 0.25);
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(naive[i] - avg[i]));

    // naive over all masks subtracts omega times the exhaustive posterior mean
    auto post = s2g::posterior_mean_over_masks(net, x, t, c, masks);
    auto cfg = s2g::cfg_combine(du, dc, 3.0);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(naive[i], cfg[i] - 0.25 * post.data()[i], 1e-12);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Masks, PosteriorMeanBasics) {
  auto net = random_net(3);
  Matrix x{{0.5, -0.5}, {2, 1}};
  auto m = BlockMask::dropping(6, {2});
  EXPECT_EQ(s2g::posterior_mean_over_masks(net, x, 10, ClassLabel(1), {m}), net.predict(x, 10, ClassLabel(1), &m));
  // (a + a + a) / 3 is a only up to rounding
  const auto three = s2g::posterior_mean_over_masks(net, x, 10, ClassLabel(1), {m, m, m});
  const auto one = net.predict(x, 10, ClassLabel(1), &m);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_NEAR(three.data()[i], one.data()[i], 1e-15);
  EXPECT_THROW(s2g::posterior_mean_over_masks(net, x, 10, ClassLabel(1), {}), s2g::ValueError);
}

TEST(Masks, MonteCarloConvergesAtRootN) {
  // Random masks with replacement; RMS error to the exhaustive mean should
  // scale like 1 / sqrt(N).
  auto net = random_net(5);
  Matrix x{{1.0, -2.0}};
  const auto all = s2g::enumerate_all_masks(6, 1);
  const auto exact = s2g::posterior_mean_over_masks(net, x, 30, ClassLabel(2), all);
  std::vector<Matrix> preds;
  for (const auto& m : all) preds.push_back(net.predict(x, 30, ClassLabel(2), &m));
  s2g::Rng rng(6);
  const int reps = 4000;
  std::vector<double> rms;
  for (int n : {1, 5, 10, 20}) {
    double se = 0;
    for (int r = 0; r < reps; ++r) {
      double m0 = 0, m1 = 0;
      for (int i = 0; i < n; ++i) {
        const auto& p = preds[rng.uniform_int(6)];
        m0 += p(0, 0) / n;
        m1 += p(0, 1) / n;
      }
      se += std::pow(m0 - exact(0, 0), 2) + std::pow(m1 - exact(0, 1), 2);
    }
    rms.push_back(std::sqrt(se / reps));
  }
  const int ns[] = {1, 5, 10, 20};
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(rms[i] * std::sqrt(ns[i]) / rms[0], 1.0, 0.1) << "N=" << ns[i];
}

TEST(Masks, EpistemicVarianceBasics) {
  auto net = random_net(7);
  Matrix x{{0.5, -0.5}, {2, 1}};
  auto m = BlockMask::dropping(6, {4});
  auto v = s2g::epistemic_variance(net, x, 10, ClassLabel(0), {m, m, m});
  for (double e : v.data()) EXPECT_NEAR(e, 0.0, 1e-28);
  EXPECT_THROW(s2g::epistemic_variance(net, x, 10, ClassLabel(0), {m}), s2g::ValueError);

  s2g::DenoiserTopology t;
  t.dim = 2;
  t.num_classes = 4;
  auto fresh = s2g::init_network(t, 1);
  auto z = s2g::epistemic_variance(fresh, x, 10, ClassLabel(0), s2g::enumerate_all_masks(6, 1));
  for (double e : z.data()) EXPECT_EQ(e, 0.0);
}

TEST(Masks, EpistemicVarianceOnTrainedNet) {
  s2g::DenoiserTopology t;
  t.dim = 1;
  t.num_classes = 2;
  s2g::TrainConfig cfg;
  cfg.steps = 1500;
  const auto sched = s2g::NoiseSchedule::linear(200);
  auto net = s2g::train(s2g::GaussianMixture::bimodal_1d(), s2g::init_network(t, 0), sched, cfg).net;
  s2g::Rng rng(8);
  Matrix x(256, 1);
  for (auto& e : x.data()) e = 5 * rng.normal();
  double mx = 0;
  for (int tt : {5, 50, 150}) {
    auto v = s2g::epistemic_variance(net, x, tt, ClassLabel(1), s2g::enumerate_all_masks(6, 1));
    for (double e : v.data()) {
      ASSERT_GE(e, 0.0);
      mx = std::max(mx, e);
    }
  }
  EXPECT_GT(mx, 0.0);
}

}  // namespace
