#pragma once

// Tabular output: CSV with a '#' key=value header block, a JSON mirror and
// minimal SVG line plots. Every table carries the resolved configuration and
// a unit for each column.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qmclock/experiments.hpp"
#include "qmclock/format.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/scenario.hpp"

namespace qmclock {

using Cell = std::variant<double, std::int64_t, std::string>;
using Metadata = std::vector<std::pair<std::string, std::string>>;

struct Column {
  std::string name;
  std::string unit;
};

struct Table {
  Metadata meta;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;

  void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
  void add_meta(std::string key, double value) { meta.emplace_back(std::move(key), format_double(value)); }
};

inline std::string render_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isnan(*d) ? "nan" : format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (const auto& [k, v] : t.meta) os << "# " << k << '=' << v << '\n';
  os << "# units=";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i].unit;
  os << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i].name;
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << render_cell(row[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.meta) j["metadata"][k] = v;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : t.columns) j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              if (std::isfinite(v))
                r.push_back(v);
              else
                r.push_back(nullptr);
            } else {
              r.push_back(v);
            }
          },
          cell);
    }
    j["rows"].push_back(std::move(r));
  }
  return j;
}

inline void write_json(std::ostream& os, const Table& t) { os << to_json(t).dump(2) << '\n'; }

inline Metadata scenario_metadata(const ScenarioConfig& c) {
  Metadata m;
  m.emplace_back("version", kVersion);
  m.emplace_back("geometry", to_string(c.geometry));
  m.emplace_back("pulse", c.pulse.label());
  m.emplace_back("hbar_J_s", format_double(c.constants.hbar));
  m.emplace_back("mass_kg", format_double(c.constants.mass));
  m.emplace_back("omega0_rad_s", format_double(c.constants.omega0));
  m.emplace_back("velocity_m_s", format_double(c.velocity));
  m.emplace_back("field_width_m", format_double(c.field_width));
  m.emplace_back("gap_m", format_double(c.gap));
  m.emplace_back("gap_ratio", format_double(c.gap_ratio()));
  m.emplace_back("rabi_frequency_rad_s", format_double(c.rabi_frequency()));
  m.emplace_back("k_per_m", format_double(c.k()));
  m.emplace_back("kl", format_double(c.k() * c.field_width));
  return m;
}

inline Table curve_table(const CurvePair& curves) {
  Table t;
  t.meta = scenario_metadata(curves.quantum.config);
  t.add_meta("table", "resonance_curve");
  t.add_meta("excluded_points", std::to_string(curves.quantum.excluded_count()));
  t.columns = {{"delta_rad_s", "rad/s"}, {"delta_hz", "Hz"}, {"p12_quantum", "1"},
               {"p12_semiclassical", "1"}, {"evaluated_at_rad_s", "rad/s"}, {"excluded", "bool"},
               {"note", "text"}};
  for (std::size_t i = 0; i < curves.quantum.deltas.size(); ++i) {
    const double d = curves.quantum.deltas[i];
    t.rows.push_back({d, to_hz(d), curves.quantum.p12[i], curves.semiclassical.p12[i],
                      curves.quantum.evaluated_at[i], std::int64_t{curves.quantum.excluded[i] ? 1 : 0}, curves.quantum.notes[i]});
  }
  return t;
}

inline std::vector<Column> shift_columns(const std::string& param, const std::string& unit) {
  return {{param, unit},
          {"delta_max_rad_s", "rad/s"},
          {"delta_max_hz", "Hz"},
          {"envelope_max_rad_s", "rad/s"},
          {"analytic_max_rad_s", "rad/s"},
          {"delta_hh_rad_s", "rad/s"},
          {"delta_hh_hz", "Hz"},
          {"hh_estimate_rad_s", "rad/s"},
          {"frac_max", "1"},
          {"frac_hh", "1"},
          {"peak_height", "1"},
          {"ok", "bool"},
          {"message", "text"}};
}

inline std::vector<Cell> shift_cells(const SweepRow& r) {
  return {r.parameter,
          r.shift.delta_max,
          to_hz(r.shift.delta_max),
          r.envelope,
          r.analytic_max,
          r.shift.delta_hh,
          to_hz(r.shift.delta_hh),
          r.hh_estimate,
          r.shift.frac_max,
          r.shift.frac_hh,
          r.shift.peak_height,
          std::int64_t{r.ok ? 1 : 0},
          r.message};
}

inline Table sweep_table(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  Table t;
  t.meta = scenario_metadata(spec.base);
  t.add_meta("table", "shift_sweep");
  t.add_meta("sweep_variable", to_string(spec.variable));
  t.add_meta("sweep_min", spec.range.min);
  t.add_meta("sweep_max", spec.range.max);
  t.add_meta("sweep_count", std::to_string(spec.range.count));
  t.add_meta("sweep_spacing", spec.range.spacing == Spacing::Linear ? "linear" : "log");
  t.columns = shift_columns(to_string(spec.variable), unit_of(spec.variable));
  for (const auto& r : rows) t.rows.push_back(shift_cells(r));
  return t;
}

inline Table shift_table(const SweepRow& row) {
  Table t;
  t.meta = scenario_metadata(row.config);
  t.add_meta("table", "shift");
  t.columns = shift_columns("velocity", "m/s");
  auto cells = shift_cells(row);
  cells[0] = row.config.velocity;
  t.rows.push_back(std::move(cells));
  return t;
}

/// Long format: one row per (l, N) cell, ready for surface plotting.
inline Table grid_table(const GridResult& g) {
  Table t;
  t.add_meta("version", kVersion);
  t.add_meta("table", "grid");
  t.add_meta("hbar_J_s", g.constants.hbar);
  t.add_meta("mass_kg", g.constants.mass);
  t.add_meta("omega0_rad_s", g.constants.omega0);
  t.add_meta("velocity_m_s", g.velocity);
  t.add_meta("pulse_rabi", "pi");
  t.add_meta("pulse_ramsey", "pi2");
  t.add_meta("monotone_in_l", g.monotone_in_l ? "true" : "false");
  t.add_meta("monotone_in_n", g.monotone_in_n ? "true" : "false");
  t.columns = {{"field_width_m", "m"}, {"gap_ratio", "1"}, {"delta_hh_rad_s", "rad/s"}, {"frac_hh", "1"},
               {"delta_max_rad_s", "rad/s"}, {"frac_max", "1"}, {"ok", "bool"}, {"message", "text"}};
  for (std::size_t i = 0; i < g.field_widths.size(); ++i)
    for (std::size_t j = 0; j < g.gap_ratios.size(); ++j) {
      const auto& r = g.cells[i][j];
      t.rows.push_back({g.field_widths[i], g.gap_ratios[j], r.shift.delta_hh, r.shift.frac_hh, r.shift.delta_max,
                        r.shift.frac_max, std::int64_t{r.ok ? 1 : 0}, r.message});
    }
  return t;
}

inline Table fit_table(const PowerLawFits& f, const std::string& source) {
  Table t;
  t.add_meta("version", kVersion);
  t.add_meta("table", "power_law_fit");
  t.add_meta("source", source);
  t.add_meta("model", "y = c*x^p");
  t.columns = {{"model", "text"}, {"c", "y/x^p"}, {"p", "1"}, {"rms_residual_log", "1"}, {"points", "count"}};
  t.rows.push_back({std::string("free"), f.free.c, f.free.p, f.free.rms_residual,
                    static_cast<std::int64_t>(f.free.points)});
  t.rows.push_back({std::string("inverse_square"), f.inverse_square.c, f.inverse_square.p,
                    f.inverse_square.rms_residual, static_cast<std::int64_t>(f.inverse_square.points)});
  return t;
}

inline Table peres_table(const std::vector<double>& velocities, const PhysicalConstants& c) {
  Table t;
  t.add_meta("version", kVersion);
  t.add_meta("table", "peres_bound");
  t.add_meta("hbar_J_s", c.hbar);
  t.add_meta("mass_kg", c.mass);
  t.columns = {{"velocity_m_s", "m/s"}, {"kinetic_energy_J", "J"}, {"tau_s", "s"}};
  for (double v : velocities)
    t.rows.push_back({v, 0.5 * c.mass * v * v, peres_bound(v, c)});
  return t;
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal SVG line plot; non-finite points break the polyline.
inline void write_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series) {
  constexpr double W = 720, H = 450, ml = 90, mr = 20, mt = 40, mb = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  const auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  const auto num = [](double v) { return format_double(v, 6); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << num(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << H / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    std::ostringstream pts;
    const auto flush = [&] {
      if (!pts.str().empty())
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
           << "\"/>\n";
      pts.str("");
    };
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double x = series[s].x[i];
      const double y = series[s].y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) {
        flush();
        continue;
      }
      pts << format_double(px(x), 7) << ',' << format_double(py(y), 7) << ' ';
    }
    flush();
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 16 * s << "\" font-size=\"12\" fill=\"" << color
       << "\">" << series[s].name << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace qmclock
