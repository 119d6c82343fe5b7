#include "s2g/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "s2g/checkpoint.hpp"
#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/hash.hpp"
#include "s2g/manifest.hpp"
#include "s2g/svg.hpp"

namespace s2g {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void say(const CommandContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Checkpoint make_checkpoint(const ExperimentConfig& c, const BlockDenoiser& net) {
  Checkpoint ck;
  ck.topology = net.topology();
  ck.T = c.T;
  ck.beta_start = c.beta_start;
  ck.beta_end = c.beta_end;
  ck.train_config_hash = c.train.hash();
  ck.params.assign(net.params().begin(), net.params().end());
  return ck;
}

std::string training_identity(const ExperimentConfig& c) {
  ExperimentConfig k = default_config(c.data.dim() == 1 ? "toy1d" : "toy2d");
  k.data = c.data;
  k.model = c.model;
  k.T = c.T;
  k.beta_start = c.beta_start;
  k.beta_end = c.beta_end;
  k.train = c.train;
  k.class_names.clear();
  k.guidance.clear();
  k.sampling = {};
  k.metrics = {};
  k.plot = {};
  k.name = "model";
  return to_json(k);
}

void check_compatible(const ExperimentConfig& c, const Checkpoint& ck, const std::string& where) {
  if (ck.topology.dim != c.data.dim() || ck.topology.num_classes != c.data.size())
    throw ConfigError("checkpoint", where + " does not match the data section");
  if (ck.T != c.T || ck.beta_start != c.beta_start || ck.beta_end != c.beta_end)
    throw ConfigError("checkpoint", where + " was trained with a different schedule");
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig config, const CommandContext& ctx) {
  if (ctx.seed) {
    config.train.seed = *ctx.seed;
    config.sampling.seed = *ctx.seed;
  }
  if (ctx.threads) config.sampling.threads = std::max<std::size_t>(1, *ctx.threads);
  return config;
}

std::string model_key(const ExperimentConfig& c) { return hex64(fnv1a64(training_identity(c))); }

std::string weak_model_key(const ExperimentConfig& c) {
  return hex64(fnv1a64(training_identity(c) + "|weak|" + csv::format_double(c.weak.capacity_factor) +
                       "|" + csv::format_double(c.weak.step_factor)));
}

Models obtain_models(const ExperimentConfig& c, const CommandContext& ctx, bool train_if_missing,
                     bool need_weak) {
  const NoiseSchedule sched = c.schedule();
  auto load_or_train = [&](const std::string& explicit_path, const std::string& key, bool weak)
      -> std::pair<BlockDenoiser, std::string> {
    std::string path = explicit_path;
    if (path.empty() && !ctx.cache_dir.empty()) path = join(ctx.cache_dir, key + ".ckpt");
    if (!path.empty() && fs::exists(path)) {
      const std::string bytes = csv::read_file(path);
      const Checkpoint ck = decode_checkpoint(bytes);
      check_compatible(c, ck, path);
      return {ck.network(), hex64(fnv1a64(bytes))};
    }
    if (!explicit_path.empty()) throw IoError("checkpoint '" + explicit_path + "' not found");
    if (!train_if_missing)
      throw IoError(std::string("no ") + (weak ? "weak " : "") + "checkpoint available; run 'train' first");
    say(ctx, std::string("training ") + (weak ? "weak model" : "model") + " (" +
                 std::to_string(weak ? std::llround(c.train.steps * c.weak.step_factor) : c.train.steps) +
                 " steps)");
    TrainResult r = weak ? train_weak(c.data, c.model, sched, c.train, c.weak.capacity_factor, c.weak.step_factor)
                         : train(c.data, init_network(c.model, c.train.seed), sched, c.train);
    const std::string bytes = encode_checkpoint(make_checkpoint(c, r.net));
    if (!path.empty()) {
      csv::write_file(path, bytes);
      csv::write_file(join(ctx.cache_dir, key + (weak ? ".weak_loss.csv" : ".loss.csv")), csv::loss_to_csv(r.curve));
    }
    return {std::move(r.net), hex64(fnv1a64(bytes))};
  };

  const std::string main_path = !ctx.checkpoint.empty() ? ctx.checkpoint : c.checkpoint;
  auto [net, net_hash] = load_or_train(main_path, model_key(c), false);
  if (net.topology().blocks != c.model.blocks)
    throw ConfigError("model.blocks", "checkpoint has " + std::to_string(net.topology().blocks) + " blocks");
  Models m{std::move(net), std::nullopt, net_hash, ""};
  if (need_weak) {
    auto [weak, weak_hash] = load_or_train(c.weak_checkpoint, weak_model_key(c), true);
    m.weak = std::move(weak);
    m.weak_hash = weak_hash;
  }
  return m;
}

SamplingResult sample_configured(const ExperimentConfig& c, const Models& models, const GuidanceSpec& spec) {
  const NoiseSchedule sched = c.schedule();
  const NoisePredictor* weak = models.weak ? &*models.weak : nullptr;
  SamplingOptions opts;
  opts.mode = c.sampling.mode;
  opts.threads = c.sampling.threads;
  const Rng root(c.sampling.seed);
  if (c.sampling.label) {
    opts.n = c.sampling.n;
    opts.label = ClassLabel(*c.sampling.label);
    opts.record_chains = c.sampling.record_chains;
    return run_sampling(models.net, sched, spec, opts, root.split("class", static_cast<std::uint64_t>(*c.sampling.label)),
                        weak);
  }
  const std::size_t K = c.data.size();
  SamplingResult total;
  std::vector<SampleBatch> parts;
  for (std::size_t k = 0; k < K; ++k) {
    opts.n = c.sampling.n / K + (k < c.sampling.n % K ? 1 : 0);
    if (opts.n == 0) continue;
    opts.label = ClassLabel(static_cast<int>(k));
    opts.record_chains = c.sampling.record_chains;
    SamplingResult r = run_sampling(models.net, sched, spec, opts, root.split("class", k), weak);
    parts.push_back(std::move(r.samples));
    for (auto& tr : r.trajectories) total.trajectories.push_back(std::move(tr));
    total.calls.strong += r.calls.strong;
    total.calls.weak += r.calls.weak;
  }
  total.samples = SampleBatch::concat(parts);
  return total;
}

TrainOutput cmd_train(const ExperimentConfig& config, const CommandContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = apply_overrides(config, ctx);
  const NoiseSchedule sched = c.schedule();
  RunManifest man;
  man.command = "train";
  man.config_hash = config_hash(c);
  man.seeds["train"] = c.train.seed;

  say(ctx, "training model (" + std::to_string(c.train.steps) + " steps)");
  TrainResult r = train(c.data, init_network(c.model, c.train.seed), sched, c.train);
  TrainOutput out;
  out.checkpoint = join(ctx.out_dir, "model.ckpt");
  const std::string bytes = encode_checkpoint(make_checkpoint(c, r.net));
  csv::write_file(out.checkpoint, bytes);
  csv::write_file(join(ctx.out_dir, "loss.csv"), csv::loss_to_csv(r.curve));
  man.checkpoints["model"] = hex64(fnv1a64(bytes));
  man.add_file(ctx.out_dir, "model.ckpt");
  man.add_file(ctx.out_dir, "loss.csv");
  if (c.needs_weak_model()) {
    say(ctx, "training weak model");
    TrainResult w = train_weak(c.data, c.model, sched, c.train, c.weak.capacity_factor, c.weak.step_factor);
    out.weak_checkpoint = join(ctx.out_dir, "weak.ckpt");
    const std::string wb = encode_checkpoint(make_checkpoint(c, w.net));
    csv::write_file(out.weak_checkpoint, wb);
    csv::write_file(join(ctx.out_dir, "weak_loss.csv"), csv::loss_to_csv(w.curve));
    man.checkpoints["weak"] = hex64(fnv1a64(wb));
    man.add_file(ctx.out_dir, "weak.ckpt");
    man.add_file(ctx.out_dir, "weak_loss.csv");
  }
  if (!ctx.cache_dir.empty()) {
    csv::write_file(join(ctx.cache_dir, model_key(c) + ".ckpt"), bytes);
  }
  man.wall_time_s = seconds_since(t0);
  write_manifest(ctx.out_dir, man);
  return out;
}

SamplingResult cmd_sample(const ExperimentConfig& config, const CommandContext& ctx,
                          const std::string& guidance_name) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = apply_overrides(config, ctx);
  const GuidanceSpec& spec = c.guidance_named(guidance_name);
  CommandContext local = ctx;
  if (local.checkpoint.empty() && c.checkpoint.empty() && local.cache_dir.empty() &&
      fs::exists(join(ctx.out_dir, "model.ckpt"))) {
    local.checkpoint = join(ctx.out_dir, "model.ckpt");
  }
  ExperimentConfig cc = c;
  const bool need_weak = spec.kind == GuidanceKind::Autoguidance;
  if (cc.weak_checkpoint.empty() && need_weak && local.cache_dir.empty() &&
      fs::exists(join(ctx.out_dir, "weak.ckpt")))
    cc.weak_checkpoint = join(ctx.out_dir, "weak.ckpt");
  const Models models = obtain_models(cc, local, false, need_weak);

  say(ctx, "sampling '" + guidance_name + "'");
  SamplingResult r = sample_configured(c, models, spec);
  RunManifest man;
  man.command = "sample";
  man.config_hash = config_hash(c);
  man.seeds["sampling"] = c.sampling.seed;
  man.checkpoints["model"] = models.net_hash;
  if (models.weak) man.checkpoints["weak"] = models.weak_hash;
  man.sampling_mode = std::string(to_string(c.sampling.mode));
  man.runs.push_back({guidance_name, guidance_to_json(spec), "", r.calls.strong, r.calls.weak});
  r.samples.provenance = man.config_hash;
  csv::write_file(join(ctx.out_dir, "samples.csv"), csv::samples_to_csv(r.samples));
  man.add_file(ctx.out_dir, "samples.csv");
  if (!r.trajectories.empty()) {
    csv::write_file(join(ctx.out_dir, "trajectories.csv"), csv::trajectories_to_csv(r.trajectories, c.T));
    man.add_file(ctx.out_dir, "trajectories.csv");
  }
  man.wall_time_s = seconds_since(t0);
  write_manifest(ctx.out_dir, man);
  return r;
}

metrics::MetricsReport cmd_eval(const std::string& samples_path, const ExperimentConfig& config,
                                const CommandContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = apply_overrides(config, ctx);
  const std::string hash = config_hash(c);
  const std::string dir = fs::path(samples_path).parent_path().string();
  const RunManifest source = read_manifest(dir.empty() ? "." : dir);
  if (source.config_hash != hash)
    throw ConfigError("config", "samples were produced under config " + source.config_hash +
                                    ", not " + hash);
  const std::string name = fs::path(samples_path).filename().string();
  for (const auto& f : source.files)
    if (f.path == name && f.hash != hex64(hash_file(samples_path)))
      throw ConfigError("config", "'" + samples_path + "' changed since its manifest was written");

  const SampleBatch batch = csv::samples_from_csv(csv::read_file(samples_path), samples_path);
  if (batch.dim() != c.data.dim()) throw ConfigError("data", "samples have the wrong dimension");
  const metrics::MetricsReport report = metrics::evaluate(batch, c.data, c.metrics);

  csv::write_file(join(ctx.out_dir, "metrics.json"), metrics::to_json(report) + "\n");
  std::vector<std::string> row;
  for (double v : metrics::csv_values(report, c.data.size())) row.push_back(csv::format_double(v));
  csv::write_file(join(ctx.out_dir, "metrics.csv"),
                  csv::table_to_csv(metrics::csv_columns(c.data.size()), {row}));
  RunManifest man;
  man.command = "eval";
  man.config_hash = hash;
  man.seeds["metrics"] = c.metrics.seed;
  man.checkpoints = source.checkpoints;
  man.runs.push_back({name, "", metrics::to_json(report), 0, 0});
  man.add_file(ctx.out_dir, "metrics.json");
  man.add_file(ctx.out_dir, "metrics.csv");
  man.wall_time_s = seconds_since(t0);
  write_manifest(ctx.out_dir, man);
  return report;
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "lambda") return SweepAxis::Lambda;
  if (text == "omega") return SweepAxis::Omega;
  if (text == "drop_count") return SweepAxis::DropCount;
  if (text == "n_subnets") return SweepAxis::NSubnets;
  throw ConfigError("axis", "unknown sweep axis '" + text + "'");
}

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::Omega: return "omega";
    case SweepAxis::DropCount: return "drop_count";
    case SweepAxis::NSubnets: return "n_subnets";
  }
  return "?";
}

GuidanceSpec with_axis_value(const GuidanceSpec& spec, SweepAxis axis, double value) {
  GuidanceSpec s = spec;
  const bool s2ish = spec.kind == GuidanceKind::S2 || spec.kind == GuidanceKind::NaiveS2;
  auto reject = [&] {
    throw ConfigError("axis", std::string(to_string(axis)) + " does not apply to " +
                                  std::string(to_string(spec.kind)));
  };
  auto as_count = [&] {
    if (value < 0.0 || value != std::floor(value))
      throw ConfigError("values", std::string(to_string(axis)) + " takes non-negative integers");
    return static_cast<int>(value);
  };
  switch (axis) {
    case SweepAxis::Lambda:
      if (!s2ish && spec.kind != GuidanceKind::CFG) reject();
      s.lambda = value;
      break;
    case SweepAxis::Omega:
      if (!s2ish) reject();
      s.omega = value;
      break;
    case SweepAxis::DropCount:
      if (!s2ish) reject();
      s.drop_count = as_count();
      break;
    case SweepAxis::NSubnets:
      if (spec.kind != GuidanceKind::NaiveS2 || spec.exhaustive) reject();
      s.n_subnets = as_count();
      break;
  }
  try {
    s.validate();
  } catch (const ValueError& e) {
    throw ConfigError("values", e.what());
  }
  return s;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config, const CommandContext& ctx,
                                const std::string& guidance_name, SweepAxis axis,
                                const std::vector<double>& values) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = apply_overrides(config, ctx);
  const GuidanceSpec& base = c.guidance_named(guidance_name);
  if (values.empty()) throw ConfigError("values", "need at least one value");
  std::vector<GuidanceSpec> specs;
  for (double v : values) {
    specs.push_back(with_axis_value(base, axis, v));
    if (base.kind == GuidanceKind::S2 || base.kind == GuidanceKind::NaiveS2) {
      try {
        (void)specs.back().drops_for(c.model.blocks);
      } catch (const ValueError& e) {
        throw ConfigError("values", e.what());
      }
    }
  }
  CommandContext local = ctx;
  if (local.checkpoint.empty() && c.checkpoint.empty() && local.cache_dir.empty() &&
      fs::exists(join(ctx.out_dir, "model.ckpt")))
    local.checkpoint = join(ctx.out_dir, "model.ckpt");
  const Models models = obtain_models(c, local, false, base.kind == GuidanceKind::Autoguidance);

  RunManifest man;
  man.command = "sweep";
  man.config_hash = config_hash(c);
  man.seeds["sampling"] = c.sampling.seed;
  man.seeds["metrics"] = c.metrics.seed;
  man.checkpoints["model"] = models.net_hash;
  man.sampling_mode = std::string(to_string(c.sampling.mode));

  std::vector<SweepRow> rows;
  std::vector<std::vector<std::string>> table;
  const auto columns = metrics::csv_columns(c.data.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    say(ctx, "sweep " + std::string(to_string(axis)) + "=" + csv::format_double(values[i]));
    const SamplingResult r = sample_configured(c, models, specs[i]);
    const metrics::MetricsReport rep = metrics::evaluate(r.samples, c.data, c.metrics);
    rows.push_back({values[i], rep, r.calls});
    const auto vals = metrics::csv_values(rep, c.data.size());
    for (std::size_t m = 0; m < columns.size(); ++m) {
      if (std::isnan(vals[m])) continue;
      table.push_back({std::string(to_string(axis)), csv::format_double(values[i]), columns[m],
                       csv::format_double(vals[m])});
    }
    man.runs.push_back({guidance_name + "@" + csv::format_double(values[i]), guidance_to_json(specs[i]),
                        metrics::to_json(rep), r.calls.strong, r.calls.weak});
  }
  csv::write_file(join(ctx.out_dir, "sweep.csv"), csv::table_to_csv({"axis", "value", "metric", "score"}, table));
  man.add_file(ctx.out_dir, "sweep.csv");
  man.wall_time_s = seconds_since(t0);
  write_manifest(ctx.out_dir, man);
  return rows;
}

std::string cmd_plot(const std::string& spec_path, const CommandContext& ctx) {
  plot::PlotSpec spec = plot::plot_spec_from_json(csv::read_file(spec_path));
  const fs::path base = fs::path(spec_path).parent_path();
  for (auto& in : spec.inputs)
    if (fs::path(in).is_relative()) in = (base / in).string();
  std::string out = spec.output.empty() ? std::string("plot.svg") : spec.output;
  if (fs::path(out).is_relative()) out = join(ctx.out_dir, out);
  csv::write_file(out, plot::render(spec));
  return out;
}

}  // namespace s2g
