// qmclock: resonance curves, quantum-motion shifts, sweeps, l x N grids,
// power-law fits and stopwatch bounds from the command line.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure (rows that
// failed are still written, flagged with ok=0).

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmclock/config_io.hpp"
#include "qmclock/experiments.hpp"
#include "qmclock/output.hpp"
#include "qmclock/shift_analysis.hpp"

namespace {

using namespace qmclock;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct CommonOptions {
  std::string config_path;
  bool dimensionless = false;
  std::optional<double> mass, velocity, field_width, gap_ratio;
  std::optional<std::string> pulse, geometry;
  std::string out;
  std::string format = "csv";
  std::string svg;
  unsigned threads = 1;
};

struct Resolved {
  ScenarioDraft draft;
  nlohmann::json file = nlohmann::json::object();
};

Resolved resolve(const CommonOptions& o) {
  Resolved r;
  if (!o.config_path.empty()) {
    r.file = load_json_file(o.config_path);
    apply_scenario_json(r.file, r.draft);
  }
  if (o.dimensionless) r.draft.constants = PhysicalConstants::dimensionless();
  if (o.mass) r.draft.constants.mass = *o.mass;
  if (o.velocity) r.draft.velocity = *o.velocity;
  if (o.field_width) r.draft.field_width = *o.field_width;
  if (o.gap_ratio) {
    r.draft.gap_ratio = *o.gap_ratio;
    if (!o.geometry && *o.gap_ratio > 0.0) r.draft.geometry = Geometry::Ramsey;
  }
  if (o.geometry) r.draft.geometry = parse_geometry(*o.geometry);
  if (o.pulse) r.draft.pulse = *o.pulse;
  return r;
}

nlohmann::json section(const Resolved& r, const char* key) {
  if (r.file.contains(key) && r.file.at(key).is_object()) return r.file.at(key);
  return nlohmann::json::object();
}

void emit(const CommonOptions& o, const Table& t) {
  if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw ConfigError("cannot write '" + o.out + "'");
    os = &file;
  }
  if (o.format == "csv")
    write_csv(*os, t);
  else
    write_json(*os, t);
}

void emit_svg(const CommonOptions& o, const std::string& title, const std::string& xl, const std::string& yl,
              const std::vector<Series>& series) {
  if (o.svg.empty()) return;
  std::ofstream f(o.svg, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + o.svg + "'");
  write_svg(f, title, xl, yl, series);
}

int report_rows(const std::vector<const SweepRow*>& rows) {
  int failed = 0;
  for (const auto* r : rows)
    if (!r->ok) {
      ++failed;
      std::cerr << "qmclock: row " << format_short(r->parameter) << " failed: " << r->message << '\n';
    }
  return failed ? kExitSolver : 0;
}

int run_curve_cmd(const CommonOptions& o, std::optional<int> points_opt, std::optional<double> span_opt) {
  const auto r = resolve(o);
  const auto cfg = r.draft.resolve();
  const auto sec = section(r, "curve");
  const int points = points_opt ? *points_opt : sec.value("points", 2001);
  const double span = span_opt ? *span_opt : sec.value("span_factor", 4.0);
  const auto grid = default_delta_grid(cfg, points, span);
  const auto curves = run_curve(cfg, grid, o.threads);
  emit(o, curve_table(curves));
  emit_svg(o, "excitation probability", "detuning [rad/s]", "P12",
           {{"quantum", curves.quantum.deltas, curves.quantum.p12},
            {"semiclassical", curves.semiclassical.deltas, curves.semiclassical.p12}});
  for (std::size_t i = 0; i < curves.quantum.notes.size(); ++i)
    if (!curves.quantum.notes[i].empty())
      std::cerr << "qmclock: delta " << format_short(curves.quantum.deltas[i]) << ": " << curves.quantum.notes[i]
                << '\n';
  for (std::size_t i = 0; i < curves.quantum.p12.size(); ++i)
    if (std::isnan(curves.quantum.p12[i])) return kExitSolver;
  return 0;
}

int run_shift_cmd(const CommonOptions& o, std::optional<double> sigma_opt, std::optional<int> samples_opt) {
  const auto r = resolve(o);
  const auto cfg = r.draft.resolve();
  const auto sec = section(r, "velocity_average");
  const double sigma_v = sigma_opt ? *sigma_opt : sec.value("sigma_v", 0.0);
  const int samples = samples_opt ? *samples_opt : sec.value("samples", 64);
  SweepRow row = evaluate_shift_row(cfg, cfg.velocity);
  Table t;
  if (sigma_v > 0.0) {
    try {
      row.shift = velocity_average(cfg, sigma_v, samples).shift;
      row.ok = true;
      row.message.clear();
    } catch (const SolverError& e) {
      row.ok = false;
      row.message = e.what();
    }
    t = shift_table(row);
    t.add_meta("velocity_average_sigma_m_s", sigma_v);
    t.add_meta("velocity_average_samples", std::to_string(samples));
  } else {
    t = shift_table(row);
  }
  emit(o, t);
  return report_rows({&row});
}

struct SweepArgs {
  std::string variable = "velocity";
  double min = 0.0, max = 0.0;
  int count = 0;
  std::string spacing = "linear";
};

int run_sweep_cmd(const CommonOptions& o, SweepArgs a, bool var_set, bool min_set, bool max_set, bool count_set,
                  bool spacing_set) {
  const auto r = resolve(o);
  const auto sec = section(r, "sweep");
  if (!r.file.contains("sweep") && !(min_set && max_set && count_set))
    throw ConfigError("sweep needs --min, --max and --count (or a 'sweep' section in the config)");
  if (!var_set && sec.contains("variable")) a.variable = sec.at("variable").get<std::string>();
  if (!min_set) a.min = sec.value("min", a.min);
  if (!max_set) a.max = sec.value("max", a.max);
  if (!count_set) a.count = sec.value("count", a.count);
  if (!spacing_set && sec.contains("spacing")) a.spacing = sec.at("spacing").get<std::string>();

  SweepSpec spec;
  spec.variable = parse_sweep_variable(a.variable);
  spec.range = {a.min, a.max, a.count, parse_spacing(a.spacing)};
  spec.base = r.draft.resolve();

  if (spec.variable == SweepVariable::Delta) {
    const auto grid = spec.range.values();
    const auto curves = run_curve(spec.base, grid, o.threads);
    emit(o, curve_table(curves));
    emit_svg(o, "excitation probability", "detuning [rad/s]", "P12",
             {{"quantum", curves.quantum.deltas, curves.quantum.p12},
              {"semiclassical", curves.semiclassical.deltas, curves.semiclassical.p12}});
    return 0;
  }

  const auto rows = run_shift_sweep(spec, o.threads);
  emit(o, sweep_table(spec, rows));
  Series num{"delta_max", {}, {}}, env_hi{"+envelope", {}, {}}, env_lo{"-envelope", {}, {}}, hh{"delta_hh", {}, {}};
  std::vector<const SweepRow*> ptrs;
  for (const auto& row : rows) {
    ptrs.push_back(&row);
    num.x.push_back(row.parameter);
    num.y.push_back(row.shift.delta_max);
    env_hi.x.push_back(row.parameter);
    env_hi.y.push_back(row.envelope);
    env_lo.x.push_back(row.parameter);
    env_lo.y.push_back(-row.envelope);
    hh.x.push_back(row.parameter);
    hh.y.push_back(row.shift.delta_hh);
  }
  emit_svg(o, "shift of the maximum", std::string(to_string(spec.variable)) + " [" + unit_of(spec.variable) + "]",
           "shift [rad/s]", {num, env_hi, env_lo});
  return report_rows(ptrs);
}

int run_grid_cmd(const CommonOptions& o, std::vector<double> ls, std::vector<double> ns) {
  const auto r = resolve(o);
  const auto sec = section(r, "grid");
  if (ls.empty() && sec.contains("field_widths")) ls = sec.at("field_widths").get<std::vector<double>>();
  if (ns.empty() && sec.contains("gap_ratios")) ns = sec.at("gap_ratios").get<std::vector<double>>();
  if (ls.empty() || ns.empty()) throw ConfigError("grid needs --l-values and --n-values");
  r.draft.constants.validate();
  const auto g = run_grid(ls, ns, r.draft.velocity, r.draft.constants, o.threads);
  emit(o, grid_table(g));
  std::vector<Series> series;
  std::vector<const SweepRow*> ptrs;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    Series s{"N=" + format_short(ns[j]), {}, {}};
    for (std::size_t i = 0; i < ls.size(); ++i) {
      s.x.push_back(ls[i]);
      s.y.push_back(g.cells[i][j].shift.frac_hh);
      ptrs.push_back(&g.cells[i][j]);
    }
    series.push_back(std::move(s));
  }
  emit_svg(o, "fractional half-height offset", "field width l [m]", "|delta_hh|/omega0", series);
  if (!g.monotone_in_l || !g.monotone_in_n)
    std::cerr << "qmclock: grid offsets not monotone (l: " << g.monotone_in_l << ", N: " << g.monotone_in_n << ")\n";
  return report_rows(ptrs);
}

int run_fit_cmd(const CommonOptions& o, const std::string& data, const std::string& xcol, const std::string& ycol,
                std::vector<double> xs, std::vector<double> ys) {
  std::string source = "command line";
  if (!data.empty()) {
    std::ifstream in(data);
    if (!in) throw ConfigError("cannot open data file '" + data + "'");
    const auto csv = read_csv_numeric(in);
    const auto& cx = xcol.empty() ? csv.columns.at(0) : csv.column(xcol);
    const auto& cy = ycol.empty() ? csv.columns.at(std::min<std::size_t>(1, csv.columns.size() - 1)) : csv.column(ycol);
    xs = cx;
    ys = cy;
    for (auto& y : ys) y = std::abs(y);
    source = data;
  }
  const auto fits = fit_inverse_square(xs, ys);
  emit(o, fit_table(fits, source));
  return 0;
}

int run_peres_cmd(const CommonOptions& o, std::vector<double> velocities) {
  const auto r = resolve(o);
  if (velocities.empty()) velocities.push_back(r.draft.velocity);
  r.draft.constants.validate();
  emit(o, peres_table(velocities, r.draft.constants));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-motion shifts of Rabi and Ramsey resonance fringes"};
  app.set_version_flag("--version", std::string(qmclock::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions o;
  app.add_option("--config", o.config_path, "JSON scenario file; flags override its values");
  app.add_flag("--dimensionless", o.dimensionless, "Use hbar = m = omega0 = 1 units");
  app.add_option("--mass", o.mass, "Atomic mass [kg]");
  app.add_option("--velocity", o.velocity, "Mean atomic velocity [m/s]");
  app.add_option("--field-width", o.field_width, "Field zone width l [m]");
  app.add_option("--gap-ratio", o.gap_ratio, "Gap ratio N = L/l (Ramsey)");
  app.add_option("--pulse", o.pulse, "pi | pi2 | omega=<rad/s>");
  app.add_option("--geometry", o.geometry, "rabi | ramsey");
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--svg", o.svg, "Also write an SVG plot to this path");
  app.add_option("--threads", o.threads, "Worker threads for grid points")->check(CLI::Range(1u, 1024u));

  auto* curve = app.add_subcommand("curve", "Quantum and semiclassical resonance curves on a shared grid");
  std::optional<int> points;
  std::optional<double> span;
  curve->add_option("--points", points, "Number of detuning points (default 2001)");
  curve->add_option("--span", span, "Grid spans +-span * Omega (default 4)");

  auto* shift = app.add_subcommand("shift", "Shift of the maximum and half-height shift for one scenario");
  std::optional<double> sigma_v;
  std::optional<int> samples;
  shift->add_option("--sigma-v", sigma_v, "Gaussian velocity spread [m/s] (0: no averaging)");
  shift->add_option("--samples", samples, "Quadrature nodes for velocity averaging (default 64)");

  auto* sweep = app.add_subcommand("sweep", "Shifts and analytic envelopes versus one parameter");
  SweepArgs sa;
  auto* o_var = sweep->add_option("--variable", sa.variable, "velocity | field_width | gap_ratio | delta");
  auto* o_spc = sweep->add_option("--spacing", sa.spacing, "linear | log");
  auto* o_min = sweep->add_option("--min", sa.min, "Range start");
  auto* o_max = sweep->add_option("--max", sa.max, "Range end");
  auto* o_cnt = sweep->add_option("--count", sa.count, "Number of points");

  auto* grid = app.add_subcommand("grid", "Fractional half-height offsets on an l x N grid");
  std::vector<double> ls, ns;
  grid->add_option("--l-values", ls, "Field widths [m]")->delimiter(',');
  grid->add_option("--n-values", ns, "Gap ratios N (0 = Rabi)")->delimiter(',');

  auto* fit = app.add_subcommand("fit", "Power-law and inverse-square fits of y against x");
  std::string data, xcol, ycol;
  std::vector<double> xs, ys;
  fit->add_option("--data", data, "CSV file with a header line");
  fit->add_option("--x", xcol, "x column name (default: first)");
  fit->add_option("--y", ycol, "y column name (default: second); absolute values are fitted");
  fit->add_option("--xs", xs, "x values")->delimiter(',');
  fit->add_option("--ys", ys, "y values")->delimiter(',');

  auto* peres = app.add_subcommand("peres", "Stopwatch resolution hbar/E");
  std::vector<double> velocities;
  peres->add_option("--velocities", velocities, "Velocities [m/s] (default: --velocity)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*curve) return run_curve_cmd(o, points, span);
    if (*shift) return run_shift_cmd(o, sigma_v, samples);
    if (*sweep) return run_sweep_cmd(o, sa, o_var->count() > 0, o_min->count() > 0, o_max->count() > 0, o_cnt->count() > 0,
                                      o_spc->count() > 0);
    if (*grid) return run_grid_cmd(o, ls, ns);
    if (*fit) return run_fit_cmd(o, data, xcol, ycol, xs, ys);
    if (*peres) return run_peres_cmd(o, velocities);
  } catch (const qmclock::ConfigError& e) {
    std::cerr << "qmclock: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "qmclock: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qmclock::SolverError& e) {
    std::cerr << "qmclock: solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
