#include "s2g/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include <json.hpp>

#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/hash.hpp"

namespace s2g {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Typed access to one JSON object with key-path error messages.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw ConfigError(key(k), "unknown key");
  }

  bool has(const char* k) const { return j_.contains(k); }
  const json& raw(const char* k) const { return j_.at(k); }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  Section sub(const char* k) const { return Section(j_.at(k), key(k)); }

  double number(const char* k, double def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k), "must be finite");
    return d;
  }

  long long integer(const char* k, long long def, long long lo,
                    long long hi = std::numeric_limits<long long>::max()) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi)
      throw ConfigError(key(k), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  std::uint64_t u64(const char* k, std::uint64_t def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(key(k), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) throw ConfigError(key(k), "expected true or false");
    return j_.at(k).get<bool>();
  }

  std::string string(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) throw ConfigError(key(k), "expected a string");
    return j_.at(k).get<std::string>();
  }

  std::optional<std::pair<double, double>> range(const char* k) const {
    if (!has(k)) return std::nullopt;
    const auto& v = j_.at(k);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(key(k), "expected [lo, hi]");
    const double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
      throw ConfigError(key(k), "range must be finite with lo < hi");
    return std::make_pair(lo, hi);
  }

 private:
  const json& j_;
  std::string path_;
};

std::vector<double> number_list(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(key, "expected a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

GaussianMixture parse_data(const Section& s, std::vector<std::string>& names) {
  s.only({"preset", "variance", "components", "class_names"});
  GaussianMixture gmm = GaussianMixture::bimodal_1d();
  if (s.has("preset") && s.has("components"))
    throw ConfigError(s.key("components"), "give either preset or components, not both");
  if (s.has("components")) {
    const auto& list = s.raw("components");
    if (!list.is_array() || list.empty())
      throw ConfigError(s.key("components"), "expected a non-empty list");
    std::vector<Component> comps;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Section c(list[i], s.key("components") + "[" + std::to_string(i) + "]");
      c.only({"weight", "mean", "variance"});
      if (!c.has("mean")) throw ConfigError(c.key("mean"), "required");
      Component comp;
      comp.weight = c.number("weight", 1.0 / static_cast<double>(list.size()));
      comp.mean = number_list(c.raw("mean"), c.key("mean"));
      comp.variance = c.has("variance") ? number_list(c.raw("variance"), c.key("variance"))
                                        : Vector(comp.mean.size(), 1.0);
      if (comp.variance.size() != comp.mean.size())
        throw ConfigError(c.key("variance"), "must have one entry per mean coordinate");
      comps.push_back(std::move(comp));
    }
    try {
      gmm = GaussianMixture(std::move(comps));
    } catch (const ValueError& e) {
      throw ConfigError(s.key("components"), e.what());
    }
  } else {
    const std::string preset = s.string("preset", "bimodal_1d");
    try {
      if (preset == "bimodal_1d") gmm = GaussianMixture::bimodal_1d(s.number("variance", 1.0));
      else if (preset == "four_mode_2d") gmm = GaussianMixture::four_mode_2d(s.number("variance", 0.25));
      else throw ConfigError(s.key("preset"), "unknown preset '" + preset + "'");
    } catch (const ValueError& e) {
      throw ConfigError(s.key("variance"), e.what());
    }
  }
  if (s.has("class_names")) {
    const auto& v = s.raw("class_names");
    if (!v.is_array()) throw ConfigError(s.key("class_names"), "expected a list of strings");
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(s.key("class_names"), "expected a list of strings");
      names.push_back(e.get<std::string>());
    }
    if (names.size() != gmm.size())
      throw ConfigError(s.key("class_names"), "need one name per component");
  }
  return gmm;
}

GuidanceSpec parse_guidance(const Section& g) {
  g.only({"kind", "lambda", "omega", "n_subnets", "exhaustive", "drop_ratio", "drop_count",
          "weak_ref", "ag_scale"});
  GuidanceSpec spec;
  if (!g.has("kind")) throw ConfigError(g.key("kind"), "required");
  try {
    spec.kind = parse_guidance_kind(g.string("kind", ""));
  } catch (const ValueError& e) {
    throw ConfigError(g.key("kind"), e.what());
  }
  spec.lambda = g.number("lambda", spec.lambda);
  spec.omega = g.number("omega", spec.omega);
  if (spec.omega < 0.0) throw ConfigError(g.key("omega"), "must be >= 0");
  spec.n_subnets = static_cast<int>(g.integer("n_subnets", spec.n_subnets, 1, 100000));
  spec.exhaustive = g.boolean("exhaustive", spec.exhaustive);
  spec.drop_ratio = g.number("drop_ratio", spec.drop_ratio);
  if (!(spec.drop_ratio >= 0.0 && spec.drop_ratio < 1.0))
    throw ConfigError(g.key("drop_ratio"), "must lie in [0, 1)");
  if (g.has("drop_count")) spec.drop_count = static_cast<int>(g.integer("drop_count", 0, 0, 100000));
  spec.weak_ref = g.string("weak_ref", spec.kind == GuidanceKind::Autoguidance ? "weak" : "");
  spec.ag_scale = g.number("ag_scale", spec.ag_scale);
  return spec;
}

ojson range_json(const std::optional<std::pair<double, double>>& r) {
  return r ? ojson::array({r->first, r->second}) : ojson();
}

ojson guidance_ojson(const GuidanceSpec& s) {
  ojson g;
  g["kind"] = std::string(to_string(s.kind));
  g["lambda"] = s.lambda;
  g["omega"] = s.omega;
  g["n_subnets"] = s.n_subnets;
  g["exhaustive"] = s.exhaustive;
  g["drop_ratio"] = s.drop_ratio;
  if (s.drop_count) g["drop_count"] = *s.drop_count;
  g["weak_ref"] = s.weak_ref;
  g["ag_scale"] = s.ag_scale;
  return g;
}

}  // namespace

const GuidanceSpec& ExperimentConfig::guidance_named(const std::string& n) const {
  for (const auto& [key, spec] : guidance)
    if (key == n) return spec;
  throw ConfigError("guidance." + n, "no such guidance entry");
}

bool ExperimentConfig::needs_weak_model() const {
  return std::any_of(guidance.begin(), guidance.end(),
                     [](const auto& g) { return g.second.kind == GuidanceKind::Autoguidance; });
}

void ExperimentConfig::validate() const {
  if (model.dim != data.dim()) throw ConfigError("model.dim", "does not match the data dimension");
  if (model.num_classes != data.size())
    throw ConfigError("model.num_classes", "does not match the number of data components");
  try {
    model.validate();
  } catch (const ValueError& e) {
    throw ConfigError("model", e.what());
  }
  try {
    (void)schedule();
  } catch (const ValueError& e) {
    throw ConfigError("schedule", e.what());
  }
  try {
    train.validate();
  } catch (const ValueError& e) {
    throw ConfigError("train", e.what());
  }
  if (!(weak.capacity_factor > 0.0 && weak.capacity_factor <= 1.0))
    throw ConfigError("train.weak.capacity_factor", "must lie in (0, 1]");
  if (!(weak.step_factor > 0.0 && weak.step_factor <= 1.0))
    throw ConfigError("train.weak.step_factor", "must lie in (0, 1]");
  for (const auto& [key, spec] : guidance) {
    try {
      spec.validate();
      if (spec.kind == GuidanceKind::S2 || spec.kind == GuidanceKind::NaiveS2) {
        if (model.blocks < 2) throw ValueError("needs at least two blocks");
        (void)spec.drops_for(model.blocks);
      }
    } catch (const ValueError& e) {
      throw ConfigError("guidance." + key, e.what());
    }
  }
  if (sampling.n == 0) throw ConfigError("sampling.n", "must be >= 1");
  if (sampling.label && (*sampling.label < 0 || static_cast<std::size_t>(*sampling.label) >= data.size()))
    throw ConfigError("sampling.label", "class id out of range");
  if (!class_names.empty() && class_names.size() != data.size())
    throw ConfigError("data.class_names", "need one name per component");
  if (!(metrics.radius > 0.0)) throw ConfigError("metrics.radius", "must be > 0");
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  const Section top(root, "");
  top.only({"name", "data", "model", "schedule", "train", "guidance", "sampling", "metrics", "plot",
            "checkpoint", "weak_checkpoint"});
  ExperimentConfig c;
  c.name = top.string("name", c.name);
  c.checkpoint = top.string("checkpoint", "");
  c.weak_checkpoint = top.string("weak_checkpoint", "");
  if (top.has("data")) c.data = parse_data(top.sub("data"), c.class_names);
  c.model.dim = c.data.dim();
  c.model.num_classes = c.data.size();

  if (top.has("model")) {
    const Section m = top.sub("model");
    m.only({"dim", "hidden", "blocks", "time_features", "num_classes"});
    c.model.dim = static_cast<std::size_t>(m.integer("dim", static_cast<long long>(c.model.dim), 1, 2));
    c.model.hidden = static_cast<std::size_t>(m.integer("hidden", 64, 1, 4096));
    c.model.blocks = static_cast<std::size_t>(m.integer("blocks", 6, 1, 64));
    c.model.time_features = static_cast<std::size_t>(m.integer("time_features", 16, 2, 1024));
    if (c.model.time_features % 2 != 0) throw ConfigError("model.time_features", "must be even");
    c.model.num_classes = static_cast<std::size_t>(
        m.integer("num_classes", static_cast<long long>(c.model.num_classes), 1, 1024));
  }
  if (top.has("schedule")) {
    const Section s = top.sub("schedule");
    s.only({"T", "beta_start", "beta_end"});
    c.T = static_cast<int>(s.integer("T", c.T, 1, 100000));
    c.beta_start = s.number("beta_start", c.beta_start);
    c.beta_end = s.number("beta_end", c.beta_end);
    if (!(c.beta_start > 0.0)) throw ConfigError("schedule.beta_start", "must be > 0");
    if (!(c.beta_end >= c.beta_start)) throw ConfigError("schedule.beta_end", "must be >= beta_start");
  }
  if (top.has("train")) {
    const Section t = top.sub("train");
    t.only({"steps", "batch_size", "learning_rate", "cond_drop_prob", "beta1", "beta2", "adam_eps",
            "seed", "log_every", "weak"});
    auto& tc = c.train;
    tc.steps = static_cast<int>(t.integer("steps", tc.steps, 0, 100000000));
    tc.batch_size = static_cast<int>(t.integer("batch_size", tc.batch_size, 1, 1 << 20));
    tc.learning_rate = t.number("learning_rate", tc.learning_rate);
    if (!(tc.learning_rate > 0.0)) throw ConfigError("train.learning_rate", "must be > 0");
    tc.cond_drop_prob = t.number("cond_drop_prob", tc.cond_drop_prob);
    if (!(tc.cond_drop_prob >= 0.0 && tc.cond_drop_prob < 1.0))
      throw ConfigError("train.cond_drop_prob", "must lie in [0, 1)");
    tc.beta1 = t.number("beta1", tc.beta1);
    if (!(tc.beta1 >= 0.0 && tc.beta1 < 1.0)) throw ConfigError("train.beta1", "must lie in [0, 1)");
    tc.beta2 = t.number("beta2", tc.beta2);
    if (!(tc.beta2 >= 0.0 && tc.beta2 < 1.0)) throw ConfigError("train.beta2", "must lie in [0, 1)");
    tc.adam_eps = t.number("adam_eps", tc.adam_eps);
    if (!(tc.adam_eps > 0.0)) throw ConfigError("train.adam_eps", "must be > 0");
    tc.seed = t.u64("seed", tc.seed);
    tc.log_every = static_cast<int>(t.integer("log_every", tc.log_every, 1, 100000000));
    if (t.has("weak")) {
      const Section w = t.sub("weak");
      w.only({"capacity_factor", "step_factor"});
      c.weak.capacity_factor = w.number("capacity_factor", c.weak.capacity_factor);
      c.weak.step_factor = w.number("step_factor", c.weak.step_factor);
    }
  }
  if (top.has("guidance")) {
    const auto& g = top.raw("guidance");
    if (!g.is_object()) throw ConfigError("guidance", "expected an object of named entries");
    // nlohmann::json sorts keys; the ordered variant keeps file order.
    const auto ordered = ojson::parse(text).at("guidance");
    for (const auto& [name, v] : ordered.items())
      c.guidance.emplace_back(name, parse_guidance(Section(g.at(name), "guidance." + name)));
  }
  if (top.has("sampling")) {
    const Section s = top.sub("sampling");
    s.only({"n", "mode", "seed", "label", "record_chains", "threads"});
    c.sampling.n = static_cast<std::size_t>(s.integer("n", static_cast<long long>(c.sampling.n), 1));
    try {
      c.sampling.mode = parse_sampling_mode(s.string("mode", "ancestral"));
    } catch (const ValueError& e) {
      throw ConfigError("sampling.mode", e.what());
    }
    c.sampling.seed = s.u64("seed", c.sampling.seed);
    if (s.has("label")) {
      const auto& v = s.raw("label");
      if (!(v.is_string() && v.get<std::string>() == "all"))
        c.sampling.label = static_cast<int>(s.integer("label", 0, 0, 1 << 20));
    }
    c.sampling.record_chains = static_cast<std::size_t>(s.integer("record_chains", 0, 0));
    c.sampling.threads = static_cast<std::size_t>(s.integer("threads", 1, 1, 1024));
  }
  if (top.has("metrics")) {
    const Section m = top.sub("metrics");
    m.only({"radius", "bins", "projections", "reference_n", "seed"});
    c.metrics.radius = m.number("radius", c.metrics.radius);
    c.metrics.bins = static_cast<std::size_t>(m.integer("bins", static_cast<long long>(c.metrics.bins), 1));
    c.metrics.projections =
        static_cast<std::size_t>(m.integer("projections", static_cast<long long>(c.metrics.projections), 1));
    c.metrics.reference_n =
        static_cast<std::size_t>(m.integer("reference_n", static_cast<long long>(c.metrics.reference_n), 1));
    c.metrics.seed = m.u64("seed", c.metrics.seed);
  }
  if (top.has("plot")) {
    const Section p = top.sub("plot");
    p.only({"bins", "x_range", "y_range"});
    c.plot.bins = static_cast<std::size_t>(p.integer("bins", static_cast<long long>(c.plot.bins), 1));
    c.plot.x_range = p.range("x_range");
    c.plot.y_range = p.range("y_range");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(csv::read_file(path));
}

std::string guidance_to_json(const GuidanceSpec& spec) { return guidance_ojson(spec).dump(); }

std::string to_json(const ExperimentConfig& c) {
  ojson j;
  j["name"] = c.name;
  ojson comps = ojson::array();
  for (const auto& comp : c.data.components())
    comps.push_back({{"weight", comp.weight}, {"mean", comp.mean}, {"variance", comp.variance}});
  j["data"]["components"] = comps;
  if (!c.class_names.empty()) j["data"]["class_names"] = c.class_names;
  j["model"] = {{"dim", c.model.dim},
                {"hidden", c.model.hidden},
                {"blocks", c.model.blocks},
                {"time_features", c.model.time_features},
                {"num_classes", c.model.num_classes}};
  j["schedule"] = {{"T", c.T}, {"beta_start", c.beta_start}, {"beta_end", c.beta_end}};
  const auto& t = c.train;
  j["train"] = {{"steps", t.steps},       {"batch_size", t.batch_size}, {"learning_rate", t.learning_rate},
                {"cond_drop_prob", t.cond_drop_prob}, {"beta1", t.beta1}, {"beta2", t.beta2},
                {"adam_eps", t.adam_eps}, {"seed", t.seed},             {"log_every", t.log_every}};
  j["train"]["weak"] = {{"capacity_factor", c.weak.capacity_factor}, {"step_factor", c.weak.step_factor}};
  j["guidance"] = ojson::object();
  for (const auto& [name, spec] : c.guidance) j["guidance"][name] = guidance_ojson(spec);
  j["sampling"] = {{"n", c.sampling.n},
                   {"mode", std::string(to_string(c.sampling.mode))},
                   {"seed", c.sampling.seed}};
  if (c.sampling.label) j["sampling"]["label"] = *c.sampling.label;
  else j["sampling"]["label"] = "all";
  j["sampling"]["record_chains"] = c.sampling.record_chains;
  j["sampling"]["threads"] = c.sampling.threads;
  j["metrics"] = {{"radius", c.metrics.radius},
                  {"bins", c.metrics.bins},
                  {"projections", c.metrics.projections},
                  {"reference_n", c.metrics.reference_n},
                  {"seed", c.metrics.seed}};
  j["plot"]["bins"] = c.plot.bins;
  if (c.plot.x_range) j["plot"]["x_range"] = range_json(c.plot.x_range);
  if (c.plot.y_range) j["plot"]["y_range"] = range_json(c.plot.y_range);
  if (!c.checkpoint.empty()) j["checkpoint"] = c.checkpoint;
  if (!c.weak_checkpoint.empty()) j["weak_checkpoint"] = c.weak_checkpoint;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  // Thread count and checkpoint locations do not change any result; the
  // sample count, class filter and recorded chains only size a run.
  ExperimentConfig canon = config;
  canon.sampling.threads = 1;
  canon.sampling.n = 1;
  canon.sampling.label.reset();
  canon.sampling.record_chains = 0;
  canon.checkpoint.clear();
  canon.weak_checkpoint.clear();
  return hex64(fnv1a64(to_json(canon)));
}

ExperimentConfig default_config(const std::string& preset) {
  ExperimentConfig c;
  if (preset == "toy1d") {
    c.name = "toy1d";
    c.data = GaussianMixture::bimodal_1d();
    c.class_names = {"-4", "+4"};
    c.plot.x_range = std::make_pair(-9.0, 9.0);
  } else if (preset == "toy2d") {
    c.name = "toy2d";
    c.data = GaussianMixture::four_mode_2d();
    c.class_names = {"(-4,-4)", "(-4,4)", "(4,-4)", "(4,4)"};
    c.plot.x_range = std::make_pair(-9.0, 9.0);
    c.plot.y_range = std::make_pair(-9.0, 9.0);
  } else {
    throw ConfigError("preset", "unknown preset '" + preset + "'");
  }
  c.model.dim = c.data.dim();
  c.model.num_classes = c.data.size();
  c.guidance = {{"unguided", GuidanceSpec::unguided()},
                {"cfg", GuidanceSpec::cfg(3.0)},
                {"autoguidance", GuidanceSpec::autoguidance(2.0)},
                {"naive_s2", GuidanceSpec::naive_s2(3.0, 0.25, 3)},
                {"s2", GuidanceSpec::s2(3.0, 0.25)}};
  for (auto& g : c.guidance)
    if (g.second.kind == GuidanceKind::S2 || g.second.kind == GuidanceKind::NaiveS2)
      g.second.drop_count = 1;
  c.validate();
  return c;
}

}  // namespace s2g
