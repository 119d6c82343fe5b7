#include "s2g/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/oracle.hpp"

namespace s2g::plot {

PlotKind parse_plot_kind(std::string_view text) {
  if (text == "hist1d") return PlotKind::Hist1d;
  if (text == "scatter2d") return PlotKind::Scatter2d;
  if (text == "trajectories") return PlotKind::Trajectories;
  throw ConfigError("kind", "unknown plot kind '" + std::string(text) + "'");
}

std::string_view to_string(PlotKind kind) noexcept {
  switch (kind) {
    case PlotKind::Hist1d: return "hist1d";
    case PlotKind::Scatter2d: return "scatter2d";
    case PlotKind::Trajectories: return "trajectories";
  }
  return "?";
}

namespace {

constexpr double kPanelW = 320.0;
constexpr double kPanelH = 260.0;
constexpr double kMarginL = 40.0;
constexpr double kMarginT = 44.0;
constexpr double kMarginB = 30.0;
constexpr double kGap = 20.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Range padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) return {-1.0, 1.0};
  if (hi - lo < 1e-9) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

Range data_range(const std::vector<double>& values) {
  if (values.empty()) return {-1.0, 1.0};
  auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  return padded(*mn, *mx);
}

void check_range(const Range& r, const char* key) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.hi > r.lo))
    throw ConfigError(key, "axis range must be finite with lo < hi");
}

struct Frame {
  double x0, y0;  // top-left of the plotting area
  Range xr, yr;
  double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * kPanelW; }
  double py(double y) const { return y0 + kPanelH - (y - yr.lo) / (yr.hi - yr.lo) * kPanelH; }
  double cx(double x) const { return std::clamp(px(x), x0, x0 + kPanelW); }
  double cy(double y) const { return std::clamp(py(y), y0, y0 + kPanelH); }
};

std::string header(double width, double height, const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
       "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
       "\" fill=\"white\"/>\n";
  if (!title.empty())
    s += "<text x=\"" + num(width / 2) + "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + escape(title) + "</text>\n";
  return s;
}

std::string axes(const Frame& f, const std::string& title) {
  std::string s = "<g class=\"axes\">\n";
  s += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(kPanelW) + "\" height=\"" +
       num(kPanelH) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * k / 4.0;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * k / 4.0;
    const double px = f.px(xv), py = f.py(yv);
    s += "<line x1=\"" + num(px) + "\" y1=\"" + num(f.y0 + kPanelH) + "\" x2=\"" + num(px) + "\" y2=\"" +
         num(f.y0 + kPanelH + 4) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(f.y0 + kPanelH + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">" + num(xv) + "</text>\n";
    s += "<line x1=\"" + num(f.x0 - 4) + "\" y1=\"" + num(py) + "\" x2=\"" + num(f.x0) + "\" y2=\"" +
         num(py) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(f.x0 - 6) + "\" y=\"" + num(py + 3) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">" + num(yv) + "</text>\n";
  }
  if (!title.empty())
    s += "<text x=\"" + num(f.x0 + kPanelW / 2) + "\" y=\"" + num(f.y0 - 6) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(title) + "</text>\n";
  return s + "</g>\n";
}

double panels_width(std::size_t n) {
  return kMarginL + static_cast<double>(n) * (kPanelW + kMarginL + kGap);
}

Frame frame_for(std::size_t i, Range xr, Range yr) {
  return {kMarginL + kGap + static_cast<double>(i) * (kPanelW + kMarginL + kGap), kMarginT, xr, yr};
}

constexpr double kHeight = kMarginT + kPanelH + kMarginB + 10.0;

}  // namespace

std::vector<double> histogram_density(const std::vector<double>& values, double lo, double hi,
                                      std::size_t bins) {
  if (bins == 0) throw ValueError("histogram_density: bins must be >= 1");
  if (!(hi > lo)) throw ValueError("histogram_density: empty range");
  std::vector<double> h(bins, 0.0);
  if (values.empty()) return h;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    const double pos = std::floor((v - lo) / width);
    const auto j = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    h[j] += 1.0;
  }
  const double norm = static_cast<double>(values.size()) * width;
  for (auto& v : h) v /= norm;
  return h;
}

std::string render_hist1d(const std::vector<HistPanel>& panels, const std::optional<GaussianMixture>& overlay,
                          std::optional<Range> x_range, std::size_t bins, const std::string& title) {
  if (overlay && overlay->dim() != 1) throw DimensionError("render_hist1d: overlay must be 1-D");
  Range xr;
  if (x_range) {
    check_range(*x_range, "x_range");
    xr = *x_range;
  } else {
    std::vector<double> all;
    for (const auto& p : panels) all.insert(all.end(), p.values.begin(), p.values.end());
    if (overlay)
      for (const auto& c : overlay->components()) {
        all.push_back(c.mean[0] - 4.0 * std::sqrt(c.variance[0]));
        all.push_back(c.mean[0] + 4.0 * std::sqrt(c.variance[0]));
      }
    xr = data_range(all);
  }
  constexpr std::size_t kCurve = 400;
  std::vector<double> curve;
  if (overlay)
    for (std::size_t k = 0; k <= kCurve; ++k) {
      const double x = xr.lo + (xr.hi - xr.lo) * static_cast<double>(k) / kCurve;
      curve.push_back(oracle::density(*overlay, std::span<const double>(&x, 1)));
    }
  std::vector<std::vector<double>> hists;
  double ymax = 0.0;
  for (const auto& p : panels) {
    hists.push_back(histogram_density(p.values, xr.lo, xr.hi, bins));
    for (double v : hists.back()) ymax = std::max(ymax, v);
  }
  for (double v : curve) ymax = std::max(ymax, v);
  const Range yr{0.0, ymax > 0.0 ? 1.1 * ymax : 1.0};

  const std::size_t n = std::max<std::size_t>(panels.size(), 1);
  std::string s = header(panels_width(n), kHeight, title);
  for (std::size_t i = 0; i < n; ++i) {
    const Frame f = frame_for(i, xr, yr);
    if (!curve.empty()) {
      std::string d = "M " + num(f.px(xr.lo)) + " " + num(f.py(0.0));
      for (std::size_t k = 0; k <= kCurve; ++k)
        d += " L " + num(f.px(xr.lo + (xr.hi - xr.lo) * static_cast<double>(k) / kCurve)) + " " +
             num(f.cy(curve[k]));
      d += " L " + num(f.px(xr.hi)) + " " + num(f.py(0.0)) + " Z";
      s += "<path class=\"truth\" d=\"" + d + "\" fill=\"#7f7f7f\" fill-opacity=\"0.35\" stroke=\"#555555\" stroke-width=\"1\"/>\n";
    }
    if (i < panels.size()) {
      const double w = (xr.hi - xr.lo) / static_cast<double>(bins);
      s += "<g class=\"bars\" fill=\"" + std::string(kPalette[i % 6]) + "\" fill-opacity=\"0.6\">\n";
      for (std::size_t b = 0; b < bins; ++b) {
        if (hists[i][b] <= 0.0) continue;
        const double x = f.px(xr.lo + w * static_cast<double>(b));
        const double top = f.cy(hists[i][b]);
        s += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" + num(kPanelW / static_cast<double>(bins)) +
             "\" height=\"" + num(f.y0 + kPanelH - top) + "\"/>\n";
      }
      s += "</g>\n";
    }
    s += axes(f, i < panels.size() ? panels[i].title : std::string());
  }
  return s + "</svg>\n";
}

std::string render_scatter2d(const std::vector<ScatterPanel>& panels, std::optional<Range> x_range,
                             std::optional<Range> y_range, const std::string& title) {
  std::vector<double> xs, ys;
  for (const auto& p : panels) {
    if (p.samples.size() > 0 && p.samples.dim() != 2)
      throw DimensionError("render_scatter2d: samples must be 2-D");
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
      xs.push_back(p.samples.points(i, 0));
      ys.push_back(p.samples.points(i, 1));
    }
  }
  Range xr = x_range ? *x_range : data_range(xs);
  Range yr = y_range ? *y_range : data_range(ys);
  check_range(xr, "x_range");
  check_range(yr, "y_range");
  const std::size_t n = std::max<std::size_t>(panels.size(), 1);
  std::string s = header(panels_width(n), kHeight, title);
  for (std::size_t i = 0; i < n; ++i) {
    const Frame f = frame_for(i, xr, yr);
    if (i < panels.size()) {
      const auto& b = panels[i].samples;
      s += "<g class=\"points\" fill-opacity=\"0.5\">\n";
      for (std::size_t r = 0; r < b.size(); ++r) {
        const int label = r < b.labels.size() ? b.labels[r] : 0;
        s += "<circle cx=\"" + num(f.cx(b.points(r, 0))) + "\" cy=\"" + num(f.cy(b.points(r, 1))) +
             "\" r=\"1.2\" fill=\"" + kPalette[static_cast<std::size_t>(std::abs(label)) % 6] + "\"/>\n";
      }
      s += "</g>\n";
    }
    s += axes(f, i < panels.size() ? panels[i].title : std::string());
  }
  return s + "</svg>\n";
}

std::string render_trajectories(const std::vector<Trajectory>& trajectories, int T,
                                std::optional<Range> x_range, std::optional<Range> y_range,
                                const std::string& title) {
  const std::size_t dim = trajectories.empty() ? 1 : trajectories.front().states.cols();
  std::vector<double> xs, ys;
  for (const auto& tr : trajectories) {
    if (tr.states.cols() != dim) throw DimensionError("render_trajectories: mixed dimensions");
    for (std::size_t r = 0; r < tr.states.rows(); ++r) {
      xs.push_back(tr.states(r, 0));
      if (dim == 2) ys.push_back(tr.states(r, 1));
    }
  }
  Range xr = x_range ? *x_range : data_range(xs);
  Range yr = y_range ? *y_range : (dim == 2 ? data_range(ys) : Range{0.0, static_cast<double>(std::max(T, 1))});
  check_range(xr, "x_range");
  check_range(yr, "y_range");
  std::string s = header(panels_width(1), kHeight, title);
  const Frame f = frame_for(0, xr, yr);
  s += "<g class=\"paths\" fill=\"none\" stroke-width=\"0.8\" stroke-opacity=\"0.7\">\n";
  for (std::size_t c = 0; c < trajectories.size(); ++c) {
    const auto& st = trajectories[c].states;
    std::string pts;
    for (std::size_t r = 0; r < st.rows(); ++r) {
      const double yv = dim == 2 ? st(r, 1) : static_cast<double>(T - static_cast<int>(r));
      if (r) pts += ' ';
      pts += num(f.cx(st(r, 0))) + "," + num(f.cy(yv));
    }
    s += "<polyline points=\"" + pts + "\" stroke=\"" + kPalette[c % 6] + "\"/>\n";
  }
  s += "</g>\n";
  s += axes(f, dim == 2 ? std::string("x, y") : std::string("x vs timestep"));
  return s + "</svg>\n";
}

std::string render(const PlotSpec& spec) {
  auto title_of = [&](std::size_t i) {
    return i < spec.panel_titles.size() ? spec.panel_titles[i] : std::string();
  };
  switch (spec.kind) {
    case PlotKind::Hist1d: {
      std::vector<HistPanel> panels;
      for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
        const auto batch = csv::samples_from_csv(csv::read_file(spec.inputs[i]), spec.inputs[i]);
        if (batch.size() > 0 && batch.dim() != 1)
          throw DimensionError("hist1d expects 1-D samples in " + spec.inputs[i]);
        panels.push_back({title_of(i), batch.points.data()});
      }
      return render_hist1d(panels, spec.overlay, spec.x_range, spec.bins, spec.title);
    }
    case PlotKind::Scatter2d: {
      std::vector<ScatterPanel> panels;
      for (std::size_t i = 0; i < spec.inputs.size(); ++i)
        panels.push_back({title_of(i), csv::samples_from_csv(csv::read_file(spec.inputs[i]), spec.inputs[i])});
      return render_scatter2d(panels, spec.x_range, spec.y_range, spec.title);
    }
    case PlotKind::Trajectories: {
      if (spec.inputs.size() != 1) throw ConfigError("inputs", "trajectories plot takes exactly one input");
      const auto trajs = csv::trajectories_from_csv(csv::read_file(spec.inputs[0]), spec.inputs[0]);
      const int T = trajs.empty() ? 1 : static_cast<int>(trajs.front().states.rows()) - 1;
      return render_trajectories(trajs, T, spec.x_range, spec.y_range, spec.title);
    }
  }
  throw ConfigError("kind", "unsupported plot kind");
}

namespace {

std::optional<Range> range_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(key, "expected [lo, hi]");
  Range r{v[0].get<double>(), v[1].get<double>()};
  check_range(r, key);
  return r;
}

}  // namespace

PlotSpec plot_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", e.what());
  }
  if (!j.is_object()) throw ConfigError("<root>", "plot spec must be an object");
  static const char* known[] = {"kind", "inputs", "panel_titles", "overlay", "x_range", "y_range",
                                "bins", "title", "output"};
  for (const auto& [k, v] : j.items())
    if (std::find(std::begin(known), std::end(known), k) == std::end(known))
      throw ConfigError(k, "unknown key");
  PlotSpec s;
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("kind", "required string");
  s.kind = parse_plot_kind(j["kind"].get<std::string>());
  if (!j.contains("inputs") || !j["inputs"].is_array()) throw ConfigError("inputs", "required list of paths");
  for (const auto& v : j["inputs"]) {
    if (!v.is_string()) throw ConfigError("inputs", "paths must be strings");
    s.inputs.push_back(v.get<std::string>());
  }
  if (j.contains("panel_titles")) {
    for (const auto& v : j["panel_titles"]) {
      if (!v.is_string()) throw ConfigError("panel_titles", "titles must be strings");
      s.panel_titles.push_back(v.get<std::string>());
    }
  }
  if (j.contains("overlay")) {
    const auto& o = j["overlay"];
    if (!o.is_string()) throw ConfigError("overlay", "expected a preset name");
    const auto name = o.get<std::string>();
    if (name == "bimodal_1d") s.overlay = GaussianMixture::bimodal_1d();
    else if (name == "standard_normal") s.overlay = GaussianMixture::standard_normal(1);
    else throw ConfigError("overlay", "unknown preset '" + name + "'");
  }
  s.x_range = range_from(j, "x_range");
  s.y_range = range_from(j, "y_range");
  if (j.contains("bins")) {
    if (!j["bins"].is_number_integer() || j["bins"].get<long long>() < 1)
      throw ConfigError("bins", "expected a positive integer");
    s.bins = j["bins"].get<std::size_t>();
  }
  if (j.contains("title")) {
    if (!j["title"].is_string()) throw ConfigError("title", "expected a string");
    s.title = j["title"].get<std::string>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a string");
    s.output = j["output"].get<std::string>();
  }
  return s;
}

}  // namespace s2g::plot
