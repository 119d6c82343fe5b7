#include <benchmark/benchmark.h>

#include "s2g/guidance.hpp"
#include "s2g/sampler.hpp"
#include "s2g/trainer.hpp"

using namespace s2g;

namespace {

BlockDenoiser bench_net(std::size_t hidden) {
  DenoiserTopology topo;
  topo.hidden = hidden;
  BlockDenoiser net = init_network(topo, 7);
  // Non-zero output layer so the forward pass does real work end to end.
  Rng rng(11);
  for (auto& p : net.params()) p += 0.01 * rng.normal();
  return net;
}

Matrix bench_points(std::size_t n) {
  Rng rng(3);
  Matrix x(n, 1);
  for (auto& v : x.data()) v = rng.normal();
  return x;
}

void BM_Forward(benchmark::State& state) {
  const auto net = bench_net(static_cast<std::size_t>(state.range(0)));
  const Matrix x = bench_points(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(x, 100, ClassLabel(1)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Forward)->Args({64, 1000})->Args({64, 10000})->Args({32, 10000});

void BM_Sampling(benchmark::State& state, GuidanceSpec spec) {
  const auto net = bench_net(64);
  const auto sched = NoiseSchedule::linear(50);
  SamplingOptions opts;
  opts.n = 1000;
  opts.label = ClassLabel(1);
  for (auto _ : state) benchmark::DoNotOptimize(run_sampling(net, sched, spec, opts, Rng(5)));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK_CAPTURE(BM_Sampling, cfg, GuidanceSpec::cfg(3.0))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sampling, s2, GuidanceSpec::s2(3.0, 0.25))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sampling, naive_s2_n20, GuidanceSpec::naive_s2(3.0, 0.25, 20))
    ->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  DenoiserTopology topo;
  TrainConfig cfg;
  cfg.steps = 10;
  const auto sched = NoiseSchedule::linear(200);
  const auto data = GaussianMixture::bimodal_1d();
  for (auto _ : state) benchmark::DoNotOptimize(train(data, init_network(topo, 1), sched, cfg));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
