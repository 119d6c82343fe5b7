#include "s2g/trainer.hpp"

#include <cmath>
#include <string>

#include "s2g/error.hpp"
#include "s2g/hash.hpp"
#include "s2g/oracle.hpp"

namespace s2g {

void TrainConfig::validate() const {
  if (steps < 0) throw ValueError("train.steps must be >= 0");
  if (batch_size < 1) throw ValueError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ValueError("train.learning_rate must be > 0");
  if (!(cond_drop_prob >= 0.0 && cond_drop_prob < 1.0))
    throw ValueError("train.cond_drop_prob must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ValueError("train.beta1/beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ValueError("train.adam_eps must be > 0");
  if (log_every < 1) throw ValueError("train.log_every must be >= 1");
}

std::uint64_t TrainConfig::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "steps=%d;batch=%d;lr=%.17g;drop=%.17g;b1=%.17g;"
                "b2=%.17g;eps=%.17g;seed=%llu;log=%d",
                steps, batch_size, learning_rate, cond_drop_prob, beta1, beta2,
                adam_eps, static_cast<unsigned long long>(seed), log_every);
  return fnv1a64(buf);
}

BlockDenoiser init_network(const DenoiserTopology& topo, std::uint64_t seed) {
  Rng rng = Rng(seed).split("init");
  return BlockDenoiser(topo, rng);
}

namespace {

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg) : m_(n, 0.0), v_(n, 0.0), cfg_(cfg) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
    }
  }

 private:
  std::vector<double> m_, v_;
  const TrainConfig& cfg_;
  int t_ = 0;
};

}  // namespace

TrainResult train(const GaussianMixture& data, BlockDenoiser net,
                  const NoiseSchedule& sched, const TrainConfig& cfg) {
  cfg.validate();
  const auto& topo = net.topology();
  if (topo.dim != data.dim() || topo.num_classes != data.size())
    throw DimensionError("train: network topology does not match the data mixture");

  TrainResult result{std::move(net), {}};
  BlockDenoiser& model = result.net;
  Rng rng = Rng(cfg.seed).split("train");
  Adam adam(model.params().size(), cfg);
  std::vector<double> grad(model.params().size());

  const auto n = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t dim = topo.dim;
  std::vector<int> ts(n);
  std::vector<ClassLabel> cs(n, ClassLabel::null());
  Matrix xt(n, dim), eps(n, dim), grad_out(n, dim);
  BlockDenoiser::Cache cache;
  double window = 0.0;
  int window_len = 0;

  for (int step = 1; step <= cfg.steps; ++step) {
    const SampleBatch x0 = oracle::sample_ground_truth(data, n, rng);
    for (std::size_t r = 0; r < n; ++r) {
      const bool drop = rng.uniform() < cfg.cond_drop_prob;
      cs[r] = drop ? ClassLabel::null() : ClassLabel(x0.labels[r]);
      ts[r] = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sched.T())));
      const double signal = sched.signal(ts[r]);
      const double sigma = sched.sigma(ts[r]);
      for (std::size_t d = 0; d < dim; ++d) {
        eps(r, d) = rng.normal();
        xt(r, d) = signal * x0.points(r, d) + sigma * eps(r, d);
      }
    }
    const Matrix pred = model.forward(xt, ts, cs, nullptr, &cache);
    double loss = 0.0;
    const double norm = 1.0 / static_cast<double>(n * dim);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double diff = pred.data()[i] - eps.data()[i];
      loss += diff * diff;
      grad_out.data()[i] = 2.0 * diff * norm;
    }
    loss *= norm;
    if (!std::isfinite(loss))
      throw DivergenceError("train: loss became non-finite at step " + std::to_string(step));
    model.backward(cache, grad_out, grad);
    adam.step(model.params(), grad);

    window += loss;
    ++window_len;
    if (step % cfg.log_every == 0 || step == cfg.steps) {
      result.curve.push_back({step, window / window_len});
      window = 0.0;
      window_len = 0;
    }
  }
  return result;
}

TrainResult train_weak(const GaussianMixture& data, const DenoiserTopology& topo,
                       const NoiseSchedule& sched, const TrainConfig& cfg,
                       double capacity_factor, double step_factor) {
  if (!(capacity_factor > 0.0 && capacity_factor <= 1.0) ||
      !(step_factor > 0.0 && step_factor <= 1.0))
    throw ValueError("train_weak: factors must lie in (0, 1]");
  DenoiserTopology weak = topo;
  weak.hidden = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(double(topo.hidden) * capacity_factor)));
  TrainConfig wcfg = cfg;
  wcfg.steps = static_cast<int>(std::llround(double(cfg.steps) * step_factor));
  return train(data, init_network(weak, cfg.seed), sched, wcfg);
}

ProbeSet make_probe_set(const GaussianMixture& data, const NoiseSchedule& sched,
                        std::size_t n, std::uint64_t seed) {
  Rng rng = Rng(seed).split("probes");
  const SampleBatch x0 = oracle::sample_ground_truth(data, n, rng);
  ProbeSet p{Matrix(n, data.dim()), std::vector<int>(n),
             std::vector<ClassLabel>(n, ClassLabel::null()), Matrix(n, data.dim())};
  for (std::size_t r = 0; r < n; ++r) {
    p.t[r] = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sched.T())));
    p.c[r] = ClassLabel(x0.labels[r]);
    for (std::size_t d = 0; d < data.dim(); ++d) {
      p.eps(r, d) = rng.normal();
      p.x(r, d) = sched.signal(p.t[r]) * x0.points(r, d) + sched.sigma(p.t[r]) * p.eps(r, d);
    }
  }
  return p;
}

double heldout_mse(const BlockDenoiser& net, const ProbeSet& probes) {
  const Matrix pred = net.forward(probes.x, probes.t, probes.c, nullptr, nullptr);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - probes.eps.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

double bayes_floor(const GaussianMixture& data, const NoiseSchedule& sched,
                   const ProbeSet& probes) {
  double acc = 0.0;
  for (std::size_t r = 0; r < probes.size(); ++r) {
    const GaussianMixture law = data.conditional(static_cast<std::size_t>(probes.c[r].id()));
    const Vector eps = oracle::posterior_mean_denoiser(law, sched, probes.t[r], probes.x.row(r));
    for (std::size_t d = 0; d < eps.size(); ++d) {
      const double diff = eps[d] - probes.eps(r, d);
      acc += diff * diff;
    }
  }
  return acc / static_cast<double>(probes.x.size());
}

}  // namespace s2g
