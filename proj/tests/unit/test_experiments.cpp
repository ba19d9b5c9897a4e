#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qmclock/config_io.hpp"
#include "qmclock/experiments.hpp"
#include "qmclock/output.hpp"
#include "qmclock/shift_analysis.hpp"
#include "qmclock/transfer_matrix.hpp"

using namespace qmclock;

namespace {

const PhysicalConstants kCs = PhysicalConstants::cesium();

std::string csv_of(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

}  // namespace

TEST(DeltaGrid, DefaultSpansFourRabiFrequencies) {
  const auto cfg = ScenarioConfig::rabi(0.05, 3e-3);
  const auto g = default_delta_grid(cfg);
  ASSERT_EQ(g.size(), 2001u);
  const double om = cfg.rabi_frequency();
  EXPECT_DOUBLE_EQ(g.front(), -4 * om);
  EXPECT_EQ(g.back(), 4 * om);
  EXPECT_EQ(g[1000], 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

TEST(DeltaGrid, RejectsTooFewPoints) {
  EXPECT_THROW(default_delta_grid(ScenarioConfig::rabi(0.05, 3e-3), 1), ConfigError);
}

TEST(ResonanceCurve, ZeroFieldGivesZeroProbability) {
  const auto cfg = ScenarioConfig::rabi(0.05, 3e-3, Pulse::explicit_omega(0.0));
  const auto grid = default_delta_grid(cfg, 41);
  const auto c = run_curve(cfg, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LE(c.quantum.p12[i], 1e-20);
    EXPECT_LE(c.semiclassical.p12[i], 1e-20);
  }
}

TEST(ResonanceCurve, FastCesiumRabiPeaksNearResonance) {
  const auto cfg = ScenarioConfig::rabi(0.05, 3e-3);
  const auto grid = default_delta_grid(cfg, 201);
  const auto c = run_curve(cfg, grid);
  std::size_t imax = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (c.quantum.p12[i] > c.quantum.p12[imax]) imax = i;
  EXPECT_EQ(imax, 100u);
  EXPECT_NEAR(c.quantum.p12[imax], 1.0, 3e-3);
  EXPECT_EQ(c.quantum.excluded_count(), 0u);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(c.quantum.p12[i], c.semiclassical.p12[i], 5e-3);
}

TEST(ResonanceCurve, ThresholdPointIsNudgedAndFlagged) {
  const auto units = PhysicalConstants::dimensionless();
  const auto cfg = ScenarioConfig::rabi(2.0, 3.0, Pulse::explicit_omega(0.5), units);
  EXPECT_THROW(excitation_probability(cfg, -2.0), ThresholdError);
  const std::vector<double> grid = {-2.5, -2.0, -1.5};
  const auto c = run_curve(cfg, grid);
  EXPECT_FALSE(c.quantum.excluded[0]);
  EXPECT_TRUE(c.quantum.excluded[1]);
  EXPECT_FALSE(c.quantum.excluded[2]);
  EXPECT_EQ(c.quantum.evaluated_at[1], -1.5);
  EXPECT_EQ(c.quantum.p12[1], c.quantum.p12[2]);
  EXPECT_FALSE(c.quantum.notes[1].empty());
  EXPECT_EQ(c.quantum.excluded_count(), 1u);
}

TEST(ParallelHarness, LowestFailingIndexIsRethrown) {
  for (unsigned threads : {1u, 3u}) {
    try {
      parallel_for_index(20, threads, [](std::size_t i) {
        if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "7");
    }
  }
}

TEST(ParallelHarness, ResultsIndependentOfThreadCount) {
  const auto cfg = ScenarioConfig::ramsey(0.05, 1.5e-3, 10.0);
  const auto grid = default_delta_grid(cfg, 301);
  const auto a = csv_of(curve_table(run_curve(cfg, grid, 1)));
  const auto b = csv_of(curve_table(run_curve(cfg, grid, 4)));
  EXPECT_EQ(a, b);
}

TEST(Sweep, RangeValuesHitEndpointsExactly) {
  const SweepRange lin{1.0, 2.0, 11, Spacing::Linear};
  const auto v = lin.values();
  EXPECT_EQ(v.front(), 1.0);
  EXPECT_EQ(v.back(), 2.0);
  const SweepRange lg{1e-3, 1e-1, 3, Spacing::Log};
  const auto w = lg.values();
  EXPECT_NEAR(w[1], 1e-2, 1e-15);
  EXPECT_EQ(w.back(), 1e-1);
  EXPECT_THROW((SweepRange{0.0, 1.0, 3, Spacing::Log}.values()), ConfigError);
  EXPECT_THROW((SweepRange{2.0, 1.0, 3, Spacing::Linear}.values()), ConfigError);
  EXPECT_THROW((SweepRange{1.0, 2.0, 0, Spacing::Linear}.values()), ConfigError);
}

TEST(Sweep, SinglePointMatchesDirectShift) {
  SweepSpec spec;
  spec.variable = SweepVariable::Velocity;
  spec.range = {0.03, 0.03, 1, Spacing::Linear};
  spec.base = ScenarioConfig::rabi(0.05, 3e-3);
  const auto rows = run_shift_sweep(spec);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_TRUE(rows[0].ok) << rows[0].message;
  const auto direct = half_height_shift(ScenarioConfig::rabi(0.03, 3e-3));
  EXPECT_EQ(rows[0].shift.delta_max, direct.delta_max);
  EXPECT_EQ(rows[0].shift.delta_hh, direct.delta_hh);
  EXPECT_GT(rows[0].envelope, 0.0);
  EXPECT_FALSE(std::isnan(rows[0].analytic_max));
}

TEST(Sweep, ApplyParameterSemantics) {
  const auto base = ScenarioConfig::ramsey(0.05, 1e-3, 10.0);
  const auto wide = apply_parameter(base, SweepVariable::FieldWidth, 2e-3);
  EXPECT_DOUBLE_EQ(wide.gap_ratio(), 10.0);
  EXPECT_DOUBLE_EQ(wide.gap, 2e-2);
  const auto rabi = apply_parameter(base, SweepVariable::GapRatio, 0.0);
  EXPECT_EQ(rabi.geometry, Geometry::Rabi);
  EXPECT_EQ(rabi.pulse.kind, Pulse::Kind::Pi);
  EXPECT_THROW(apply_parameter(base, SweepVariable::Delta, 1.0), ConfigError);
  EXPECT_EQ(parse_sweep_variable("v"), SweepVariable::Velocity);
  EXPECT_EQ(parse_sweep_variable("N"), SweepVariable::GapRatio);
  EXPECT_THROW(parse_sweep_variable("mass"), ConfigError);
}

TEST(Sweep, InvalidRowIsFlaggedNotThrown) {
  const auto row = evaluate_shift_row(ScenarioConfig::rabi(-1.0, 3e-3), -1.0);
  EXPECT_FALSE(row.ok);
  EXPECT_FALSE(row.message.empty());
  EXPECT_TRUE(std::isnan(row.shift.delta_hh));
}

TEST(Fit, RecoversInverseSquare) {
  std::vector<double> xs, ys;
  for (double x : {1.0, 2.0, 3.0, 5.0, 8.0}) {
    xs.push_back(x);
    ys.push_back(7.0 / (x * x));
  }
  const auto f = fit_inverse_square(xs, ys);
  EXPECT_NEAR(f.free.p, -2.0, 1e-12);
  EXPECT_NEAR(f.free.c, 7.0, 1e-11);
  EXPECT_NEAR(f.inverse_square.c, 7.0, 1e-11);
  EXPECT_LT(f.free.rms_residual, 1e-12);
  EXPECT_EQ(f.free.points, 5u);
}

TEST(Fit, RejectsBadInput) {
  const std::vector<double> three = {1, 2, 3};
  EXPECT_THROW(fit_inverse_square(three, three), ConfigError);
  const std::vector<double> x = {1, 2, 3, 4}, neg = {1, -2, 3, 4}, same = {2, 2, 2, 2};
  EXPECT_THROW(fit_inverse_square(x, neg), ConfigError);
  EXPECT_THROW(fit_inverse_square(same, x), ConfigError);
  const std::vector<double> five = {1, 2, 3, 4, 5};
  EXPECT_THROW(fit_inverse_square(x, five), ConfigError);
}

TEST(Grid, HalfHeightOffsetScalesAndRabiColumnMatches) {
  const std::vector<double> ls = {1.5e-3, 3e-3};
  const std::vector<double> ns = {0.0, 2.0};
  const auto g = run_grid(ls, ns, 0.05, kCs);
  for (const auto& row : g.cells)
    for (const auto& c : row) ASSERT_TRUE(c.ok) << c.message;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    const double ratio = g.cells[1][j].shift.frac_hh / g.cells[0][j].shift.frac_hh;
    EXPECT_NEAR(ratio, 0.25, 0.05);
  }
  const auto rabi = half_height_shift(ScenarioConfig::rabi(0.05, 3e-3));
  EXPECT_EQ(g.cells[1][0].shift.delta_hh, rabi.delta_hh);
  EXPECT_TRUE(g.monotone_in_l);
  EXPECT_TRUE(g.monotone_in_n);
  const auto text = csv_of(grid_table(g));
  EXPECT_EQ(text.find("thread"), std::string::npos);
  EXPECT_NE(text.find("# monotone_in_l=true"), std::string::npos);
}

TEST(Output, CsvLayout) {
  Table t;
  t.add_meta("table", "demo");
  t.add_meta("x", 0.1);
  t.columns = {{"a", "m"}, {"b", "text"}, {"c", "1"}};
  t.rows.push_back({1.0 / 3.0, std::string("q\"x,y"), std::int64_t{4}});
  t.rows.push_back({kNaN, std::string("plain"), std::int64_t{0}});
  const auto s = csv_of(t);
  EXPECT_EQ(s,
            "# table=demo\n# x=0.10000000000000001\n# units=m,text,1\na,b,c\n"
            "0.33333333333333331,\"q\"\"x,y\",4\nnan,plain,0\n");
}

TEST(Output, JsonMirrorsTable) {
  Table t;
  t.add_meta("table", "demo");
  t.columns = {{"a", "m"}, {"b", "1"}};
  t.rows.push_back({2.5, kNaN});
  const auto j = to_json(t);
  EXPECT_EQ(j["metadata"]["table"], "demo");
  EXPECT_EQ(j["columns"][0]["unit"], "m");
  EXPECT_EQ(j["rows"][0][0], 2.5);
  EXPECT_TRUE(j["rows"][0][1].is_null());
}

TEST(Output, SvgIsWellFormed) {
  std::ostringstream os;
  write_svg(os, "t", "x", "y", {{"s", {0.0, 1.0, 2.0}, {1.0, kNaN, 3.0}}});
  const auto s = os.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
}

TEST(ConfigIo, PulseAndGeometryStrings) {
  EXPECT_EQ(parse_pulse("pi").kind, Pulse::Kind::Pi);
  EXPECT_EQ(parse_pulse("pi2").kind, Pulse::Kind::HalfPi);
  const auto p = parse_pulse("omega=12.5");
  EXPECT_EQ(p.kind, Pulse::Kind::Explicit);
  EXPECT_EQ(p.omega, 12.5);
  EXPECT_THROW(parse_pulse("omega=12x"), ConfigError);
  EXPECT_THROW(parse_pulse("2pi"), ConfigError);
  EXPECT_THROW(parse_geometry("mz"), ConfigError);
}

TEST(ConfigIo, JsonScenarioAndDefaults) {
  ScenarioDraft d;
  apply_scenario_json(nlohmann::json::parse(R"({"velocity": 0.02, "field_width": 0.002, "gap_ratio": 5})"), d);
  const auto c = d.resolve();
  EXPECT_EQ(c.geometry, Geometry::Ramsey);
  EXPECT_EQ(c.pulse.kind, Pulse::Kind::HalfPi);
  EXPECT_DOUBLE_EQ(c.gap, 0.01);
  EXPECT_EQ(c.velocity, 0.02);

  ScenarioDraft bad;
  apply_scenario_json(nlohmann::json::parse(R"({"velocity": -3})"), bad);
  EXPECT_THROW(bad.resolve(), ConfigError);
  EXPECT_THROW(apply_scenario_json(nlohmann::json::parse(R"({"velocity": "fast"})"), bad), ConfigError);
  EXPECT_THROW(apply_scenario_json(nlohmann::json::array(), bad), ConfigError);
}

TEST(ConfigIo, ReadsCommentedCsv) {
  std::istringstream in("# a=1\n# units=m,1\nx,y\n1,2\n3,nan\n");
  const auto d = read_csv_numeric(in);
  ASSERT_EQ(d.header.size(), 2u);
  EXPECT_EQ(d.column("x"), (std::vector<double>{1, 3}));
  EXPECT_TRUE(std::isnan(d.column("y")[1]));
  EXPECT_THROW(d.column("z"), ConfigError);
}
