#include "s2g/config.hpp"

#include <gtest/gtest.h>

#include "s2g/error.hpp"

namespace {

using s2g::ConfigError;
using s2g::parse_config;

std::string error_key(const std::string& text) {
  try {
    parse_config(text).validate();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

TEST(Config, EmptyObjectIsTheDefaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.T, 200);
  EXPECT_EQ(c.model.hidden, 64u);
  EXPECT_EQ(c.model.blocks, 6u);
  EXPECT_EQ(c.model.time_features, 16u);
  EXPECT_EQ(c.data.size(), 2u);
  EXPECT_EQ(c.train.steps, 20000);
  EXPECT_EQ(c.train.batch_size, 256);
  EXPECT_EQ(c.sampling.mode, s2g::SamplingMode::Ancestral);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(error_key(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(error_key(R"({"model": {"hidden": "big"}})"), "model.hidden");
  EXPECT_EQ(error_key(R"({"model": {"hidden": 0}})"), "model.hidden");
  EXPECT_EQ(error_key(R"({"model": {"time_features": 7}})"), "model.time_features");
  EXPECT_EQ(error_key(R"({"model": {"dim": 2}})"), "model.dim");
  EXPECT_EQ(error_key(R"({"schedule": {"beta_end": 1e-6}})"), "schedule.beta_end");
  EXPECT_EQ(error_key(R"({"train": {"cond_drop_prob": 1.0}})"), "train.cond_drop_prob");
  EXPECT_EQ(error_key(R"({"train": {"weak": {"capacity_factor": 2}}})"), "train.weak.capacity_factor");
  EXPECT_EQ(error_key(R"({"train": {"weak": {"extra": 2}}})"), "train.weak.extra");
  EXPECT_EQ(error_key(R"({"data": {"preset": "spiral"}})"), "data.preset");
  EXPECT_EQ(error_key(R"({"data": {"components": [{"mean": [0], "variance": [-1]}]}})"), "data.components");
  EXPECT_EQ(error_key(R"({"data": {"components": [{"weight": 1}]}})"), "data.components[0].mean");
  EXPECT_EQ(error_key(R"({"data": {"class_names": ["a"]}})"), "data.class_names");
  EXPECT_EQ(error_key(R"({"guidance": {"g": {"lambda": 2}}})"), "guidance.g.kind");
  EXPECT_EQ(error_key(R"({"guidance": {"g": {"kind": "magic"}}})"), "guidance.g.kind");
  EXPECT_EQ(error_key(R"({"guidance": {"g": {"kind": "s2", "omega": -1}}})"), "guidance.g.omega");
  EXPECT_EQ(error_key(R"({"guidance": {"g": {"kind": "s2", "drop_ratio": 1.5}}})"), "guidance.g.drop_ratio");
  EXPECT_EQ(error_key(R"({"guidance": {"g": {"kind": "s2", "drop_count": 6}}})"), "guidance.g");
  EXPECT_EQ(error_key(R"({"sampling": {"n": 0}})"), "sampling.n");
  EXPECT_EQ(error_key(R"({"sampling": {"label": 2}})"), "sampling.label");
  EXPECT_EQ(error_key(R"({"sampling": {"mode": "sde"}})"), "sampling.mode");
  EXPECT_EQ(error_key(R"({"metrics": {"radius": 0}})"), "metrics.radius");
  EXPECT_EQ(error_key("{"), "<root>");
  EXPECT_EQ(error_key("[]"), "<root>");
}

TEST(Config, GuidanceKeepsFileOrder) {
  const auto c = parse_config(R"({"guidance": {
      "zeta": {"kind": "cfg", "lambda": 5},
      "alpha": {"kind": "s2", "lambda": 5, "omega": 0.5, "drop_count": 2},
      "mid": {"kind": "autoguidance", "ag_scale": 2}}})");
  ASSERT_EQ(c.guidance.size(), 3u);
  EXPECT_EQ(c.guidance[0].first, "zeta");
  EXPECT_EQ(c.guidance[1].first, "alpha");
  EXPECT_EQ(c.guidance[2].first, "mid");
  EXPECT_EQ(c.guidance_named("alpha").omega, 0.5);
  EXPECT_EQ(*c.guidance_named("alpha").drop_count, 2);
  EXPECT_EQ(c.guidance_named("mid").weak_ref, "weak");
  EXPECT_TRUE(c.needs_weak_model());
  EXPECT_THROW(c.guidance_named("nope"), ConfigError);
}

TEST(Config, CanonicalJsonRoundTrips) {
  for (const char* preset : {"toy1d", "toy2d"}) {
    const auto c = s2g::default_config(preset);
    const auto text = s2g::to_json(c);
    const auto back = parse_config(text);
    EXPECT_EQ(s2g::to_json(back), text);
    EXPECT_EQ(s2g::config_hash(back), s2g::config_hash(c));
  }
  EXPECT_THROW(s2g::default_config("toy3d"), ConfigError);
}

TEST(Config, HashIgnoresRunSizeOnly) {
  const auto base = s2g::default_config("toy1d");
  const auto h = s2g::config_hash(base);
  EXPECT_EQ(h.size(), 16u);
  auto c = base;
  c.sampling.threads = 4;
  c.sampling.n = 17;
  c.sampling.label = 1;
  c.sampling.record_chains = 8;
  c.checkpoint = "/tmp/x.ckpt";
  EXPECT_EQ(s2g::config_hash(c), h);
  c = base;
  c.sampling.seed = 1;
  EXPECT_NE(s2g::config_hash(c), h);
  c = base;
  c.train.steps = 19999;
  EXPECT_NE(s2g::config_hash(c), h);
  c = base;
  c.guidance[4].second.omega = 0.5;
  EXPECT_NE(s2g::config_hash(c), h);
}

TEST(Config, CustomComponents) {
  const auto c = parse_config(R"({"data": {"components": [
      {"weight": 0.25, "mean": [0, 1]}, {"weight": 0.75, "mean": [3, 3], "variance": [0.5, 2]}]}})");
  EXPECT_EQ(c.data.dim(), 2u);
  EXPECT_EQ(c.model.dim, 2u);
  EXPECT_EQ(c.model.num_classes, 2u);
  EXPECT_EQ(c.data[0].variance, (s2g::Vector{1, 1}));
  EXPECT_EQ(c.data[1].variance, (s2g::Vector{0.5, 2}));
  EXPECT_NO_THROW(c.validate());
}

}  // namespace
