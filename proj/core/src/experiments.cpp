#include "s2g/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/manifest.hpp"
#include "s2g/svg.hpp"

namespace s2g {

namespace fs = std::filesystem;

namespace {

struct Method {
  std::string name;
  std::string title;
};

const std::vector<Method> kFig3Methods = {{"unguided", "Unguided"},
                                          {"cfg", "CFG"},
                                          {"autoguidance", "Autoguidance"},
                                          {"naive_s2", "Naive S2"},
                                          {"s2", "S2"}};

class Writer {
 public:
  Writer(const CommandContext& ctx, ReproResult& result, RunManifest& man)
      : ctx_(ctx), result_(result), man_(man) {}

  void file(const std::string& name, const std::string& contents) {
    csv::write_file((fs::path(ctx_.out_dir) / name).string(), contents);
    result_.files.push_back(name);
    man_.add_file(ctx_.out_dir, name);
  }

 private:
  const CommandContext& ctx_;
  ReproResult& result_;
  RunManifest& man_;
};

void say(const CommandContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

std::optional<plot::Range> to_range(const std::optional<std::pair<double, double>>& r) {
  if (!r) return std::nullopt;
  return plot::Range{r->first, r->second};
}

std::string metrics_json(const std::vector<std::pair<std::string, metrics::MetricsReport>>& reports) {
  nlohmann::ordered_json j;
  for (const auto& [name, rep] : reports) j[name] = nlohmann::ordered_json::parse(metrics::to_json(rep));
  return j.dump(2) + "\n";
}

std::string metrics_table(const std::vector<std::pair<std::string, metrics::MetricsReport>>& reports,
                          std::size_t classes) {
  std::vector<std::string> header{"method"};
  for (const auto& c : metrics::csv_columns(classes)) header.push_back(c);
  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, rep] : reports) {
    std::vector<std::string> row{name};
    for (double v : metrics::csv_values(rep, classes)) row.push_back(csv::format_double(v));
    rows.push_back(std::move(row));
  }
  return csv::table_to_csv(header, rows);
}

struct RunRecord {
  SamplingResult result;
  metrics::MetricsReport report;
};

RunRecord run_method(const ExperimentConfig& c, const Models& models, const std::string& name,
                     const GuidanceSpec& spec, ReproResult& out, RunManifest& man, const CommandContext& ctx) {
  say(ctx, "  sampling " + name);
  RunRecord r{sample_configured(c, models, spec), {}};
  r.report = metrics::evaluate(r.result.samples, c.data, c.metrics);
  out.metrics[name] = r.report;
  out.calls[name] = r.result.calls;
  man.runs.push_back({name, guidance_to_json(spec), metrics::to_json(r.report), r.result.calls.strong,
                      r.result.calls.weak});
  return r;
}

RunManifest start_manifest(const std::string& name, const ExperimentConfig& c, const Models& models) {
  RunManifest man;
  man.command = "repro " + name;
  man.config_hash = config_hash(c);
  man.seeds["train"] = c.train.seed;
  man.seeds["sampling"] = c.sampling.seed;
  man.seeds["metrics"] = c.metrics.seed;
  man.checkpoints["model"] = models.net_hash;
  if (models.weak) man.checkpoints["weak"] = models.weak_hash;
  man.sampling_mode = std::string(to_string(c.sampling.mode));
  return man;
}

void fig3(const std::string& name, const ExperimentConfig& c, const CommandContext& ctx, ReproResult& out) {
  const Models models = obtain_models(c, ctx, true, c.needs_weak_model());
  RunManifest man = start_manifest(name, c, models);
  Writer w(ctx, out, man);
  std::vector<std::pair<std::string, metrics::MetricsReport>> reports;
  std::vector<plot::HistPanel> hist;
  std::vector<plot::ScatterPanel> scatter;
  for (const auto& m : kFig3Methods) {
    RunRecord r = run_method(c, models, m.name, c.guidance_named(m.name), out, man, ctx);
    w.file(m.name + ".csv", csv::samples_to_csv(r.result.samples));
    reports.emplace_back(m.name, r.report);
    if (c.data.dim() == 1) hist.push_back({m.title, r.result.samples.points.data()});
    else scatter.push_back({m.title, std::move(r.result.samples)});
  }
  w.file("metrics.json", metrics_json(reports));
  w.file("metrics.csv", metrics_table(reports, c.data.size()));
  const std::string title = c.data.dim() == 1 ? "1-D toy: samples vs ground truth" : "2-D toy: samples";
  if (c.data.dim() == 1)
    w.file(name + ".svg", plot::render_hist1d(hist, c.data, to_range(c.plot.x_range), c.plot.bins, title));
  else
    w.file(name + ".svg", plot::render_scatter2d(scatter, to_range(c.plot.x_range), to_range(c.plot.y_range), title));
  write_manifest(ctx.out_dir, man);
}

void fig8(const ExperimentConfig& c, const CommandContext& ctx, ReproResult& out) {
  const Models models = obtain_models(c, ctx, true, c.needs_weak_model());
  RunManifest man = start_manifest("fig8_traj", c, models);
  Writer w(ctx, out, man);
  std::vector<std::pair<std::string, metrics::MetricsReport>> reports;
  for (const std::string name : {"cfg", "s2"}) {
    RunRecord r = run_method(c, models, name, c.guidance_named(name), out, man, ctx);
    reports.emplace_back(name, r.report);
    w.file(name + "_samples.csv", csv::samples_to_csv(r.result.samples));
    w.file(name + "_trajectories.csv", csv::trajectories_to_csv(r.result.trajectories, c.T));
    w.file("fig8_" + name + ".svg",
           plot::render_trajectories(r.result.trajectories, c.T, to_range(c.plot.x_range), std::nullopt,
                                     name == "cfg" ? "CFG trajectories" : "S2 trajectories"));
  }
  w.file("metrics.json", metrics_json(reports));
  write_manifest(ctx.out_dir, man);
}

void fig9(const ExperimentConfig& base, const CommandContext& ctx, ReproResult& out) {
  const Models models = obtain_models(base, ctx, true, base.needs_weak_model());
  RunManifest man = start_manifest("fig9_naive_vs_s2", base, models);
  Writer w(ctx, out, man);
  std::vector<std::vector<std::string>> rows;
  for (int k = 0; k < 3; ++k) {
    ExperimentConfig c = base;
    c.sampling.seed = base.sampling.seed + static_cast<std::uint64_t>(k);
    man.seeds["sampling_" + std::to_string(k)] = c.sampling.seed;
    const std::string tag = "seed" + std::to_string(k);
    std::map<std::string, SampleBatch> batches;
    for (const std::string name : {"naive_s2", "s2", "cfg"}) {
      RunRecord r = run_method(c, models, name + "_" + tag, c.guidance_named(name), out, man, ctx);
      w.file(name + "_" + tag + ".csv", csv::samples_to_csv(r.result.samples));
      batches[name] = std::move(r.result.samples);
    }
    const Rng proj = Rng(c.metrics.seed).split("fig9-projections");
    const double naive_s2 = metrics::sliced_wasserstein(batches["naive_s2"], batches["s2"], c.metrics.projections, proj);
    const double naive_cfg = metrics::sliced_wasserstein(batches["naive_s2"], batches["cfg"], c.metrics.projections, proj);
    const double s2_cfg = metrics::sliced_wasserstein(batches["s2"], batches["cfg"], c.metrics.projections, proj);
    out.scalars["sw_naive_s2_" + tag] = naive_s2;
    out.scalars["sw_naive_cfg_" + tag] = naive_cfg;
    out.scalars["sw_s2_cfg_" + tag] = s2_cfg;
    rows.push_back({std::to_string(c.sampling.seed), csv::format_double(naive_s2), csv::format_double(naive_cfg),
                    csv::format_double(s2_cfg)});
    const auto xr = to_range(c.plot.x_range), yr = to_range(c.plot.y_range);
    w.file("fig9_" + tag + "_left_naive.svg",
           plot::render_scatter2d({{"Naive S2 (all 6 masks)", batches["naive_s2"]}}, xr, yr, "seed " + std::to_string(c.sampling.seed)));
    w.file("fig9_" + tag + "_right_s2.svg",
           plot::render_scatter2d({{"S2 (one mask per step)", batches["s2"]}}, xr, yr, "seed " + std::to_string(c.sampling.seed)));
  }
  w.file("sliced_wasserstein.csv", csv::table_to_csv({"seed", "naive_vs_s2", "naive_vs_cfg", "s2_vs_cfg"}, rows));
  write_manifest(ctx.out_dir, man);
}

void ablations(const ExperimentConfig& c, const CommandContext& ctx, ReproResult& out) {
  const Models models = obtain_models(c, ctx, true, c.needs_weak_model());
  RunManifest man = start_manifest("ablations", c, models);
  Writer w(ctx, out, man);

  struct Sweep {
    std::string guidance;
    SweepAxis axis;
    std::vector<double> values;
  };
  const std::vector<Sweep> sweeps = {
      {"cfg", SweepAxis::Lambda, {1, 2, 3, 5, 7.5}},
      {"s2", SweepAxis::Lambda, {1, 2, 3, 5, 7.5}},
      {"s2", SweepAxis::Omega, {0, 0.1, 0.25, 0.5}},
      {"s2", SweepAxis::DropCount, {1, 2, 3}},
      {"naive_s2", SweepAxis::NSubnets, {1, 5, 10, 20}},
  };
  const auto columns = metrics::csv_columns(c.data.size());
  for (const auto& s : sweeps) {
    std::vector<std::vector<std::string>> table;
    for (double v : s.values) {
      const GuidanceSpec spec = with_axis_value(c.guidance_named(s.guidance), s.axis, v);
      const std::string run = s.guidance + "_" + std::string(to_string(s.axis)) + "=" + csv::format_double(v);
      RunRecord r = run_method(c, models, run, spec, out, man, ctx);
      const auto vals = metrics::csv_values(r.report, c.data.size());
      for (std::size_t m = 0; m < columns.size(); ++m)
        if (!std::isnan(vals[m]))
          table.push_back({std::string(to_string(s.axis)), csv::format_double(v), columns[m], csv::format_double(vals[m])});
    }
    w.file("sweep_" + s.guidance + "_" + std::string(to_string(s.axis)) + ".csv",
           csv::table_to_csv({"axis", "value", "metric", "score"}, table));
  }

  const ProbeSet probes = make_probe_set(c.data, c.schedule(), 256, c.metrics.seed);
  const auto dev = subnetwork_deviation(models.net, probes);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < dev.size(); ++k) {
    rows.push_back({std::to_string(k), csv::format_double(dev[k])});
    out.scalars["subnet_mse_drop" + std::to_string(k)] = dev[k];
  }
  w.file("subnetwork_deviation.csv", csv::table_to_csv({"dropped_blocks", "mse_vs_full"}, rows));
  write_manifest(ctx.out_dir, man);
}

}  // namespace

const std::vector<std::string>& repro_experiments() {
  static const std::vector<std::string> names = {"fig3_1d", "fig3_2d", "fig8_traj", "fig9_naive_vs_s2", "ablations"};
  return names;
}

ExperimentConfig repro_config(const std::string& name) {
  if (name == "fig3_1d") {
    ExperimentConfig c = default_config("toy1d");
    c.name = name;
    return c;
  }
  if (name == "fig3_2d") {
    ExperimentConfig c = default_config("toy2d");
    c.name = name;
    for (auto& [n, g] : c.guidance)
      if (g.kind != GuidanceKind::Unguided && g.kind != GuidanceKind::Autoguidance) g.lambda = 5.0;
    return c;
  }
  if (name == "fig8_traj") {
    ExperimentConfig c = default_config("toy1d");
    c.name = name;
    c.sampling.mode = SamplingMode::Deterministic;
    c.sampling.n = 64;
    c.sampling.record_chains = 16;
    return c;
  }
  if (name == "fig9_naive_vs_s2") {
    ExperimentConfig c = repro_config("fig3_2d");
    c.name = name;
    c.sampling.n = 4000;
    for (auto& [n, g] : c.guidance)
      if (g.kind == GuidanceKind::NaiveS2) g.exhaustive = true;
    return c;
  }
  if (name == "ablations") {
    ExperimentConfig c = default_config("toy1d");
    c.name = name;
    c.sampling.n = 2000;
    return c;
  }
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

ReproResult cmd_repro(const std::string& name, const CommandContext& ctx_in) {
  const auto t0 = std::chrono::steady_clock::now();
  CommandContext ctx = ctx_in;
  if (ctx.cache_dir.empty()) ctx.cache_dir = (fs::path(ctx.out_dir) / "cache").string();
  const ExperimentConfig c = apply_overrides(repro_config(name), ctx);
  fs::create_directories(ctx.out_dir);
  csv::write_file((fs::path(ctx.out_dir) / "config.json").string(), to_json(c) + "\n");
  ReproResult out;
  out.files.push_back("config.json");
  say(ctx, "repro " + name);
  if (name == "fig3_1d" || name == "fig3_2d") fig3(name, c, ctx, out);
  else if (name == "fig8_traj") fig8(c, ctx, out);
  else if (name == "fig9_naive_vs_s2") fig9(c, ctx, out);
  else ablations(c, ctx, out);
  out.scalars["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<double> subnetwork_deviation(const BlockDenoiser& net, const ProbeSet& probes) {
  const std::size_t B = net.topology().blocks;
  const Matrix full = net.forward(probes.x, probes.t, probes.c, nullptr, nullptr);
  std::vector<double> out(B, 0.0);
  for (std::size_t k = 1; k < B; ++k) {
    const auto masks = enumerate_all_masks(B, k);
    double acc = 0.0;
    for (const auto& m : masks) {
      const Matrix sub = net.forward(probes.x, probes.t, probes.c, &m, nullptr);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        const double d = sub.data()[i] - full.data()[i];
        acc += d * d;
      }
    }
    out[k] = acc / static_cast<double>(masks.size() * full.size());
  }
  return out;
}

}  // namespace s2g
