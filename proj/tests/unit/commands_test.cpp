#include "s2g/commands.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/experiments.hpp"
#include "s2g/manifest.hpp"

namespace {

namespace fs = std::filesystem;
using s2g::CommandContext;
using s2g::ExperimentConfig;
using s2g::SweepAxis;

// A model small enough to train in about a second.
ExperimentConfig tiny() {
  auto c = s2g::default_config("toy1d");
  c.T = 40;
  c.model.hidden = 16;
  c.train.steps = 300;
  c.train.batch_size = 64;
  c.train.log_every = 100;
  c.sampling.n = 400;
  c.validate();
  return c;
}

struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  CommandContext ctx(const std::string& sub) const {
    CommandContext c;
    c.out_dir = (root / sub).string();
    c.cache_dir = (root / "cache").string();
    fs::create_directories(c.out_dir);
    return c;
  }
};

std::string json_of(const s2g::metrics::MetricsReport& r) { return s2g::metrics::to_json(r); }

TEST(Commands, TrainWritesArtifactsAndManifest) {
  Workspace w("s2g_cmd_train");
  auto ctx = w.ctx("train");
  const auto out = s2g::cmd_train(tiny(), ctx);
  EXPECT_TRUE(fs::exists(out.checkpoint));
  EXPECT_TRUE(fs::exists(out.weak_checkpoint));  // the toy config has an autoguidance entry
  EXPECT_TRUE(fs::exists(fs::path(ctx.out_dir) / "loss.csv"));
  const auto m = s2g::read_manifest(ctx.out_dir);
  EXPECT_EQ(m.config_hash, s2g::config_hash(tiny()));
  EXPECT_EQ(m.checkpoints.count("model"), 1u);
  ASSERT_FALSE(m.files.empty());
  for (const auto& f : m.files) EXPECT_TRUE(fs::exists(fs::path(ctx.out_dir) / f.path)) << f.path;
}

TEST(Commands, EvalRefusesSamplesFromAnotherConfig) {
  Workspace w("s2g_cmd_eval");
  const auto c = tiny();
  auto sctx = w.ctx("sample");
  s2g::cmd_train(c, w.ctx("train"));
  s2g::cmd_sample(c, sctx, "cfg");
  const auto samples = (fs::path(sctx.out_dir) / "samples.csv").string();
  auto ectx = w.ctx("eval");
  EXPECT_NO_THROW(s2g::cmd_eval(samples, c, ectx));
  EXPECT_TRUE(fs::exists(fs::path(ectx.out_dir) / "metrics.json"));

  auto other = c;
  other.sampling.seed = 99;
  EXPECT_THROW(s2g::cmd_eval(samples, other, ectx), s2g::ConfigError);
  // run-size overrides are not a different experiment
  auto fewer = c;
  fewer.sampling.n = 10;
  EXPECT_NO_THROW(s2g::cmd_eval(samples, fewer, ectx));

  // a tampered sample file is caught by its recorded hash
  s2g::csv::write_file(samples, "x,label\n0.5,0\n");
  EXPECT_THROW(s2g::cmd_eval(samples, c, ectx), s2g::ConfigError);
  // and a file without a manifest is refused
  auto bare = w.ctx("bare");
  s2g::csv::write_file((fs::path(bare.out_dir) / "s.csv").string(), "x,label\n0.5,0\n");
  EXPECT_THROW(s2g::cmd_eval((fs::path(bare.out_dir) / "s.csv").string(), c, bare), s2g::IoError);
}

TEST(Commands, SweepEqualsSampleThenEval) {
  Workspace w("s2g_cmd_sweep");
  auto c = tiny();
  for (auto& g : c.guidance)
    if (g.first == "cfg") g.second.lambda = 1.0;
  s2g::cmd_train(c, w.ctx("train"));
  auto sctx = w.ctx("sample");
  const auto sampled = s2g::cmd_sample(c, sctx, "cfg");
  const auto direct = s2g::cmd_eval((fs::path(sctx.out_dir) / "samples.csv").string(), c, w.ctx("eval"));
  const auto rows = s2g::cmd_sweep(c, w.ctx("sweep"), "cfg", SweepAxis::Lambda, {1.0});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(json_of(rows[0].report), json_of(direct));
  EXPECT_EQ(rows[0].calls.total(), sampled.calls.total());
  const auto table = s2g::csv::parse_rows(s2g::csv::read_file((fs::path(w.root) / "sweep" / "sweep.csv").string()));
  ASSERT_GT(table.size(), 1u);
  EXPECT_EQ(table[0], (std::vector<std::string>{"axis", "value", "metric", "score"}));
  // metrics that do not apply in 1-D are left out
  std::size_t defined = 0;
  for (double v : s2g::metrics::csv_values(direct, 2)) defined += !std::isnan(v);
  EXPECT_EQ(table.size() - 1, defined);
}

TEST(Commands, SweepOmegaZeroRowEqualsCfg) {
  Workspace w("s2g_cmd_omega");
  const auto c = tiny();
  s2g::cmd_train(c, w.ctx("train"));
  const auto s2 = s2g::cmd_sweep(c, w.ctx("s2"), "s2", SweepAxis::Omega, {0.0, 0.25});
  const double lambda = c.guidance_named("s2").lambda;
  const auto cfg = s2g::cmd_sweep(c, w.ctx("cfg"), "cfg", SweepAxis::Lambda, {lambda});
  ASSERT_EQ(s2.size(), 2u);
  EXPECT_EQ(json_of(s2[0].report), json_of(cfg[0].report));
  EXPECT_NE(json_of(s2[1].report), json_of(cfg[0].report));
  // one batched forward per branch per step, per class batch
  EXPECT_EQ(s2[0].calls.total(), static_cast<std::size_t>(3 * c.T) * c.data.size());
  EXPECT_EQ(cfg[0].calls.total(), static_cast<std::size_t>(2 * c.T) * c.data.size());
}

TEST(Commands, InvalidAxisOrKind) {
  EXPECT_THROW(s2g::parse_sweep_axis("temperature"), s2g::ConfigError);
  EXPECT_EQ(s2g::parse_sweep_axis("n_subnets"), SweepAxis::NSubnets);
  const auto cfg = s2g::GuidanceSpec::cfg(3.0);
  EXPECT_THROW(s2g::with_axis_value(cfg, SweepAxis::Omega, 0.5), s2g::ConfigError);
  EXPECT_THROW(s2g::with_axis_value(cfg, SweepAxis::DropCount, 1), s2g::ConfigError);
  EXPECT_THROW(s2g::with_axis_value(s2g::GuidanceSpec::s2(3.0, 0.25), SweepAxis::NSubnets, 5), s2g::ConfigError);
  EXPECT_EQ(s2g::with_axis_value(cfg, SweepAxis::Lambda, 5).lambda, 5.0);
  EXPECT_EQ(s2g::with_axis_value(s2g::GuidanceSpec::naive_s2(3.0, 0.25, 3), SweepAxis::NSubnets, 20).n_subnets, 20);
  Workspace w("s2g_cmd_axis");
  EXPECT_THROW(s2g::cmd_sweep(tiny(), w.ctx("x"), "unguided", SweepAxis::Omega, {0.0}), s2g::ConfigError);
  EXPECT_THROW(s2g::cmd_repro("fig42", w.ctx("y")), s2g::ConfigError);
}

TEST(Commands, OverridesAndModelKeys) {
  CommandContext ctx;
  ctx.seed = 7;
  ctx.threads = 3;
  const auto c = s2g::apply_overrides(tiny(), ctx);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.sampling.seed, 7u);
  EXPECT_EQ(c.sampling.threads, 3u);
  // the model key follows training inputs only
  auto d = tiny();
  d.sampling.seed = 5;
  EXPECT_EQ(s2g::model_key(d), s2g::model_key(tiny()));
  d.train.steps = 301;
  EXPECT_NE(s2g::model_key(d), s2g::model_key(tiny()));
  auto e = tiny();
  e.weak.capacity_factor = 0.5;
  EXPECT_EQ(s2g::model_key(e), s2g::model_key(tiny()));
  EXPECT_NE(s2g::weak_model_key(e), s2g::weak_model_key(tiny()));
}

TEST(Commands, SampleWithoutModelIsAnIoError) {
  Workspace w("s2g_cmd_nomodel");
  EXPECT_THROW(s2g::cmd_sample(tiny(), w.ctx("s"), "cfg"), s2g::IoError);
}

}  // namespace
