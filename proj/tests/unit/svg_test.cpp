#include "s2g/svg.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <regex>

#include "s2g/csv.hpp"
#include "s2g/error.hpp"
#include "s2g/oracle.hpp"

namespace {

namespace fs = std::filesystem;
namespace plot = s2g::plot;
using s2g::GaussianMixture;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& n) const { return (path / n).string(); }
};

// Tags open and close in order; self-closing tags and the prolog are skipped.
bool well_formed(const std::string& svg) {
  std::vector<std::string> stack;
  const std::regex tag(R"(<(/?)([A-Za-z][\w:-]*)[^>]*?(/?)>)");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[3] == "/") continue;
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != m[2]) return false;
      stack.pop_back();
    } else {
      stack.push_back(m[2]);
    }
  }
  return stack.empty() && svg.rfind("<?xml", 0) == 0 && svg.find("<svg") != std::string::npos;
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

s2g::SampleBatch draws(const GaussianMixture& g, std::size_t n, std::uint64_t seed) {
  s2g::Rng r(seed);
  return s2g::oracle::sample_ground_truth(g, n, r);
}

TEST(Svg, ScatterHasOnePointPerRowInsideTheBox) {
  TempDir d("s2g_svg_scatter");
  auto b = draws(GaussianMixture::four_mode_2d(), 10000, 1);
  b.points(0, 0) = 100.0;  // outside the declared range, gets clamped
  s2g::csv::write_file(d.file("s.csv"), s2g::csv::samples_to_csv(b));
  plot::PlotSpec spec;
  spec.kind = plot::PlotKind::Scatter2d;
  spec.inputs = {d.file("s.csv")};
  spec.x_range = plot::Range{-8, 8};
  spec.y_range = plot::Range{-8, 8};
  const auto svg = plot::render(spec);
  ASSERT_TRUE(well_formed(svg));

  std::smatch box;
  ASSERT_TRUE(std::regex_search(svg, box, std::regex(
      R"re(<rect x="([-\d.e]+)" y="([-\d.e]+)" width="([-\d.e]+)" height="([-\d.e]+)" fill="none")re")));
  const double x0 = std::stod(box[1]), y0 = std::stod(box[2]);
  const double x1 = x0 + std::stod(box[3]), y1 = y0 + std::stod(box[4]);
  const std::regex circle(R"re(<circle cx="([-\d.e]+)" cy="([-\d.e]+)")re");
  std::size_t n = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), circle); it != std::sregex_iterator(); ++it, ++n) {
    const double cx = std::stod((*it)[1]), cy = std::stod((*it)[2]);
    EXPECT_TRUE(cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1) << cx << "," << cy;
  }
  EXPECT_EQ(n, b.size());
}

TEST(Svg, SameInputsGiveIdenticalBytes) {
  TempDir d("s2g_svg_det");
  s2g::csv::write_file(d.file("a.csv"), s2g::csv::samples_to_csv(draws(GaussianMixture::bimodal_1d(), 2000, 2)));
  plot::PlotSpec spec;
  spec.inputs = {d.file("a.csv"), d.file("a.csv")};
  spec.panel_titles = {"one", "two & <three>"};
  spec.overlay = GaussianMixture::bimodal_1d();
  const auto a = plot::render(spec);
  const auto b = plot::render(spec);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(well_formed(a));
  EXPECT_NE(a.find("two &amp; &lt;three&gt;"), std::string::npos);
  EXPECT_EQ(count(a, "class=\"truth\""), 2u);
}

TEST(Svg, EmptySampleFileGivesAxesOnly) {
  TempDir d("s2g_svg_empty");
  s2g::csv::write_file(d.file("e1.csv"), "x,label\n");
  s2g::csv::write_file(d.file("e2.csv"), "x,y,label\n");
  plot::PlotSpec h;
  h.inputs = {d.file("e1.csv")};
  const auto hs = plot::render(h);
  EXPECT_TRUE(well_formed(hs));
  EXPECT_EQ(count(hs, "class=\"axes\""), 1u);
  EXPECT_EQ(count(hs, "class=\"bars\""), 1u);
  EXPECT_EQ(count(hs, "<rect"), 2u);  // background and frame, no bars
  plot::PlotSpec s;
  s.kind = plot::PlotKind::Scatter2d;
  s.inputs = {d.file("e2.csv")};
  const auto ss = plot::render(s);
  EXPECT_TRUE(well_formed(ss));
  EXPECT_EQ(count(ss, "<circle"), 0u);
  EXPECT_EQ(count(ss, "class=\"axes\""), 1u);
}

TEST(Svg, MalformedCsvReportsLine) {
  TempDir d("s2g_svg_bad");
  s2g::csv::write_file(d.file("bad.csv"), "x,label\n1,0\noops,1\n");
  plot::PlotSpec spec;
  spec.inputs = {d.file("bad.csv")};
  try {
    plot::render(spec);
    FAIL();
  } catch (const s2g::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Histogram, AreasSumToOne) {
  s2g::Rng r(3);
  for (int k = 0; k < 30; ++k) {
    std::vector<double> v(1 + r.uniform_int(5000));
    for (auto& x : v) x = 4.0 * r.normal();
    const std::size_t bins = 1 + r.uniform_int(200);
    const double lo = -3.0 - 5.0 * r.uniform(), hi = 3.0 + 5.0 * r.uniform();
    const auto h = plot::histogram_density(v, lo, hi, bins);
    ASSERT_EQ(h.size(), bins);
    double area = 0.0;
    for (double x : h) area += x * (hi - lo) / static_cast<double>(bins);
    EXPECT_NEAR(area, 1.0, 1e-9);
  }
}

TEST(Svg, Trajectories) {
  std::vector<s2g::Trajectory> tr(4);
  s2g::Rng r(4);
  for (auto& t : tr) {
    t.states = s2g::Matrix(11, 1);
    for (auto& v : t.states.data()) v = r.normal();
  }
  const auto svg = plot::render_trajectories(tr, 10, std::nullopt, std::nullopt, "fan");
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(count(svg, "<polyline"), 4u);
  EXPECT_EQ(svg, plot::render_trajectories(tr, 10, std::nullopt, std::nullopt, "fan"));
}

TEST(PlotSpec, JsonParsing) {
  const auto s = plot::plot_spec_from_json(
      R"({"kind": "scatter2d", "inputs": ["a.csv"], "x_range": [-9, 9], "title": "t", "output": "o.svg"})");
  EXPECT_EQ(s.kind, plot::PlotKind::Scatter2d);
  ASSERT_TRUE(s.x_range.has_value());
  EXPECT_EQ(s.x_range->hi, 9.0);
  EXPECT_FALSE(s.y_range.has_value());
  EXPECT_THROW(plot::plot_spec_from_json(R"({"kind": "pie", "inputs": []})"), s2g::Error);
  EXPECT_THROW(plot::plot_spec_from_json(R"({"kind": "hist1d", "inputs": [], "x_range": [2, 1]})"), s2g::ConfigError);
}

}  // namespace
