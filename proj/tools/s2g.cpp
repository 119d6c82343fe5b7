#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "s2g/commands.hpp"
#include "s2g/config.hpp"
#include "s2g/error.hpp"
#include "s2g/experiments.hpp"
#include "s2g/metrics.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kDivergence = 3;
constexpr int kIo = 4;

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw s2g::ConfigError("values", "not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"s2g: guidance experiments on Gaussian-mixture toys"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".", cache_dir, checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool quiet = false;
  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Overrides train.seed and sampling.seed");
  app.add_option("--threads", threads, "Worker threads for sampling");
  app.add_option("--cache", cache_dir, "Directory of trained models keyed by content");
  app.add_option("--checkpoint", checkpoint, "Trained model to use");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  auto* train = app.add_subcommand("train", "Train the denoiser (and the weak model if needed)");

  auto* sample = app.add_subcommand("sample", "Draw guided samples");
  std::string guidance, label, axis, values, samples_path, spec_path, experiment, preset = "toy1d";
  std::optional<std::size_t> n;
  sample->add_option("--guidance", guidance, "Guidance entry name")->required();
  sample->add_option("--class", label, "Class id, or 'all' for a balanced split");
  sample->add_option("--n", n, "Number of samples");

  auto* eval = app.add_subcommand("eval", "Compute metrics for a samples CSV");
  eval->add_option("--samples", samples_path, "samples.csv written by 'sample'")->required();

  auto* sweep = app.add_subcommand("sweep", "Sample and evaluate over one guidance axis");
  sweep->add_option("--guidance", guidance, "Guidance entry name")->required();
  sweep->add_option("--axis", axis, "lambda | omega | drop_count | n_subnets")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  auto* plot = app.add_subcommand("plot", "Render a plot spec to SVG");
  plot->add_option("--spec", spec_path, "Plot spec (JSON)")->required();

  auto* repro = app.add_subcommand("repro", "Reproduce a named experiment end to end");
  repro->add_option("experiment", experiment, "fig3_1d | fig3_2d | fig8_traj | fig9_naive_vs_s2 | ablations")
      ->required();

  auto* show = app.add_subcommand("config", "Print a built-in config");
  show->add_option("--preset", preset, "toy1d | toy2d");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  s2g::CommandContext ctx;
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  ctx.threads = threads;
  ctx.cache_dir = cache_dir;
  ctx.checkpoint = checkpoint;
  ctx.log = quiet ? nullptr : &std::cerr;

  try {
    auto config = [&] {
      if (config_path.empty()) throw s2g::ConfigError("--config", "required for this command");
      return s2g::load_config(config_path);
    };
    if (*train) {
      const auto out = s2g::cmd_train(config(), ctx);
      std::cout << out.checkpoint << "\n";
    } else if (*sample) {
      auto c = config();
      if (!label.empty()) {
        if (label == "all") {
          c.sampling.label.reset();
        } else {
          try {
            c.sampling.label = std::stoi(label);
          } catch (const std::exception&) {
            throw s2g::ConfigError("--class", "expected a class id or 'all'");
          }
        }
      }
      if (n) c.sampling.n = *n;
      c.validate();
      const auto r = s2g::cmd_sample(c, ctx, guidance);
      std::cout << "samples " << r.samples.size() << ", denoiser calls " << r.calls.total() << "\n";
    } else if (*eval) {
      const auto report = s2g::cmd_eval(samples_path, config(), ctx);
      std::cout << s2g::metrics::to_json(report) << "\n";
    } else if (*sweep) {
      const auto rows = s2g::cmd_sweep(config(), ctx, guidance, s2g::parse_sweep_axis(axis), parse_values(values));
      std::cout << rows.size() << " sweep points written\n";
    } else if (*plot) {
      std::cout << s2g::cmd_plot(spec_path, ctx) << "\n";
    } else if (*repro) {
      const auto r = s2g::cmd_repro(experiment, ctx);
      for (const auto& f : r.files) std::cout << f << "\n";
    } else if (*show) {
      std::cout << s2g::to_json(s2g::default_config(preset)) << "\n";
    }
  } catch (const s2g::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const s2g::DivergenceError& e) {
    std::cerr << "numeric divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const s2g::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const s2g::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kIo;
  } catch (const s2g::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
