#include "s2g/csv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "s2g/error.hpp"
#include "s2g/oracle.hpp"

namespace {

using s2g::ParseError;
namespace csv = s2g::csv;

std::size_t error_line(const std::string& text) {
  try {
    csv::samples_from_csv(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(Csv, FormatDoubleRoundTrips) {
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::format_double(1.0), "1");
  EXPECT_EQ(csv::format_double(-2.5), "-2.5");
  s2g::Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = r.normal() * std::pow(10.0, static_cast<double>(r.uniform_int(40)) - 20.0);
    EXPECT_EQ(std::strtod(csv::format_double(v).c_str(), nullptr), v);
  }
  const double tiny = std::numeric_limits<double>::denorm_min();
  EXPECT_EQ(std::strtod(csv::format_double(tiny).c_str(), nullptr), tiny);
}

TEST(Csv, SamplesRoundTrip) {
  for (const auto& g : {s2g::GaussianMixture::bimodal_1d(), s2g::GaussianMixture::four_mode_2d()}) {
    s2g::Rng r(2);
    auto b = s2g::oracle::sample_ground_truth(g, 300, r);
    const auto text = csv::samples_to_csv(b);
    EXPECT_EQ(text.substr(0, text.find('\n')), g.dim() == 1 ? "x,label" : "x,y,label");
    const auto back = csv::samples_from_csv(text);
    EXPECT_EQ(back.points, b.points);
    EXPECT_EQ(back.labels, b.labels);
    EXPECT_EQ(csv::samples_to_csv(back), text);
  }
  // header only is an empty batch
  EXPECT_EQ(csv::samples_from_csv("x,label\n").size(), 0u);
}

TEST(Csv, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(""), 1u);
  EXPECT_EQ(error_line("a,b\n1,0\n"), 1u);
  EXPECT_EQ(error_line("x,label\n1,0\n2,0\nabc,1\n"), 4u);
  EXPECT_EQ(error_line("x,label\n1,0\n2\n"), 3u);
  EXPECT_EQ(error_line("x,y,label\n1,2,0\n1,2,3,4\n"), 3u);
  EXPECT_EQ(error_line("x,label\n1,0.5\n"), 2u);
  // blank lines are skipped but still counted
  EXPECT_EQ(error_line("x,label\n\n1,0\n\nz,0\n"), 5u);
  try {
    csv::samples_from_csv("x,label\nq,0\n", "file.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("file.csv:2"), std::string::npos);
  }
}

TEST(Csv, TrajectoriesRoundTrip) {
  std::vector<s2g::Trajectory> tr(3);
  s2g::Rng r(3);
  for (auto& t : tr) {
    t.states = s2g::Matrix(5, 2);
    for (auto& v : t.states.data()) v = r.normal();
  }
  const auto text = csv::trajectories_to_csv(tr, 4);
  EXPECT_EQ(text.substr(0, text.find('\n')), "chain,t,x,y");
  const auto back = csv::trajectories_from_csv(text);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i].states, tr[i].states);
  EXPECT_THROW(csv::trajectories_from_csv("chain,t,x\n1,0,0.5\n"), ParseError);
  EXPECT_THROW(csv::trajectories_from_csv("chain,t\n"), ParseError);
}

TEST(Csv, Tables) {
  const auto t = csv::table_to_csv({"a", "b"}, {{"1", "x"}, {"2", "y"}});
  EXPECT_EQ(t, "a,b\n1,x\n2,y\n");
  const auto rows = csv::parse_rows(t);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2], (std::vector<std::string>{"2", "y"}));
  EXPECT_EQ(csv::loss_to_csv({{100, 0.5}, {200, 0.25}}), "step,loss\n100,0.5\n200,0.25\n");
  EXPECT_THROW(csv::read_file("/nonexistent/x.csv"), s2g::IoError);
}

}  // namespace
