#pragma once

// Sweep harness: resonance curves on shared detuning grids, shift-vs-parameter
// tables, l x N grids and power-law fits. Points may be evaluated on several
// threads; results are always assembled by index.

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qmclock/error.hpp"
#include "qmclock/format.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/scenario.hpp"
#include "qmclock/semiclassical.hpp"
#include "qmclock/shift_analysis.hpp"
#include "qmclock/transfer_matrix.hpp"

namespace qmclock {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs fn(i) for i in [0, n) on up to `threads` workers, index i always on
/// worker i mod threads. If any call throws, the exception of the lowest
/// failing index is rethrown after all workers finish.
template <typename Fn>
void parallel_for_index(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

enum class CurveKind { Quantum, Semiclassical };

inline const char* to_string(CurveKind k) { return k == CurveKind::Quantum ? "quantum" : "semiclassical"; }

struct ResonanceCurve {
  CurveKind kind = CurveKind::Quantum;
  ScenarioConfig config;
  std::vector<double> deltas;        // rad/s
  std::vector<double> evaluated_at;  // detuning actually used, rad/s
  std::vector<double> p12;         // NaN where excluded
  std::vector<bool> excluded;      // threshold or solver exclusion
  std::vector<std::string> notes;  // per-point reason, empty when fine

  std::size_t excluded_count() const { return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), true)); }
};

struct CurvePair {
  ResonanceCurve quantum;
  ResonanceCurve semiclassical;
};

/// Linear grid of `count` points over ±span_factor·Ω.
inline std::vector<double> default_delta_grid(const ScenarioConfig& config, int count = 2001,
                                              double span_factor = 4.0) {
  config.validate();
  if (count < 2) throw ConfigError("delta grid needs at least 2 points");
  double omega = config.rabi_frequency();
  if (omega == 0.0) omega = 2.0 * std::numbers::pi / config.flight_time();
  const double lo = -span_factor * omega;
  const double step = 2.0 * span_factor * omega / (count - 1);
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = lo + step * i;
  if (count % 2 == 1) grid[count / 2] = 0.0;
  grid.back() = span_factor * omega;
  return grid;
}

/// Both curves on the shared grid. A quantum point that lands on a threshold
/// is re-evaluated one grid step away and flagged as excluded; other solver
/// failures leave NaN.
inline CurvePair run_curve(const ScenarioConfig& config, std::span<const double> deltas, unsigned threads = 1) {
  config.validate();
  CurvePair out;
  for (auto* c : {&out.quantum, &out.semiclassical}) {
    c->config = config;
    c->deltas.assign(deltas.begin(), deltas.end());
    c->evaluated_at.assign(deltas.begin(), deltas.end());
    c->p12.assign(deltas.size(), kNaN);
    c->excluded.assign(deltas.size(), false);
    c->notes.assign(deltas.size(), {});
  }
  out.quantum.kind = CurveKind::Quantum;
  out.semiclassical.kind = CurveKind::Semiclassical;

  const std::size_t n = deltas.size();
  const auto grid_step = [&](std::size_t i) {
    if (n < 2) return 1e-9 * std::max(1.0, std::abs(deltas[i]));
    return i + 1 < n ? deltas[i + 1] - deltas[i] : deltas[i] - deltas[i - 1];
  };
  parallel_for_index(n, threads, [&](std::size_t i) {
    const double d = deltas[i];
    out.semiclassical.p12[i] = semiclassical_probability(config, d);
    auto& q = out.quantum;
    try {
      q.p12[i] = excitation_probability(config, d);
    } catch (const ThresholdError&) {
      q.excluded[i] = true;
      const double nudged = d + grid_step(i);
      q.evaluated_at[i] = nudged;
      q.notes[i] = "threshold; evaluated at " + format_double(nudged);
      try {
        q.p12[i] = excitation_probability(config, nudged);
      } catch (const SolverError& e) {
        q.p12[i] = kNaN;
        q.notes[i] = std::string("threshold; nudge failed: ") + e.what();
      }
    } catch (const SolverError& e) {
      q.excluded[i] = true;
      q.notes[i] = e.what();
    }
  });
  return out;
}

enum class SweepVariable { Delta, Velocity, FieldWidth, GapRatio };
enum class Spacing { Linear, Log };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Delta: return "delta";
    case SweepVariable::Velocity: return "velocity";
    case SweepVariable::FieldWidth: return "field_width";
    case SweepVariable::GapRatio: return "gap_ratio";
  }
  return "?";
}

inline const char* unit_of(SweepVariable v) {
  switch (v) {
    case SweepVariable::Delta: return "rad/s";
    case SweepVariable::Velocity: return "m/s";
    case SweepVariable::FieldWidth: return "m";
    case SweepVariable::GapRatio: return "1";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "delta") return SweepVariable::Delta;
  if (s == "velocity" || s == "v") return SweepVariable::Velocity;
  if (s == "field_width" || s == "l") return SweepVariable::FieldWidth;
  if (s == "gap_ratio" || s == "N") return SweepVariable::GapRatio;
  throw ConfigError("unknown sweep variable '" + s + "'");
}

struct SweepRange {
  double min = 0.0;
  double max = 0.0;
  int count = 2;
  Spacing spacing = Spacing::Linear;

  void validate() const {
    if (count < 1) throw ConfigError("sweep count must be >= 1");
    if (count >= 2 && !(min < max)) throw ConfigError("sweep requires min < max");
    if (count == 1 && !(min <= max)) throw ConfigError("sweep requires min <= max");
    if (spacing == Spacing::Log && !(min > 0.0)) throw ConfigError("log spacing requires min > 0");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> v(count);
    if (count == 1) {
      v[0] = min;
      return v;
    }
    for (int i = 0; i < count; ++i) {
      const double f = static_cast<double>(i) / (count - 1);
      v[i] = spacing == Spacing::Linear ? min + f * (max - min)
                                        : std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
    }
    v.back() = max;
    return v;
  }
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::Velocity;
  SweepRange range;
  ScenarioConfig base;
};

/// base with the swept parameter replaced. Sweeping the gap ratio to 0 turns a
/// Ramsey base into the matching Rabi π-pulse scenario.
inline ScenarioConfig apply_parameter(const ScenarioConfig& base, SweepVariable var, double value) {
  ScenarioConfig c = base;
  switch (var) {
    case SweepVariable::Velocity: c.velocity = value; break;
    case SweepVariable::FieldWidth: {
      const double n = base.gap_ratio();
      c.field_width = value;
      c.gap = n * value;
      break;
    }
    case SweepVariable::GapRatio:
      if (value == 0.0) {
        c.geometry = Geometry::Rabi;
        c.gap = 0.0;
        if (c.pulse.kind == Pulse::Kind::HalfPi) c.pulse = Pulse::pi();
      } else {
        c.geometry = Geometry::Ramsey;
        c.gap = value * c.field_width;
      }
      break;
    case SweepVariable::Delta: throw ConfigError("delta sweeps are resonance curves; use run_curve");
  }
  return c;
}

struct SweepRow {
  double parameter = 0.0;
  ScenarioConfig config;
  ShiftResult shift;
  double envelope = kNaN;         // analytic |Δ_Q^(M)| envelope, rad/s (NaN if none applies)
  double analytic_max = kNaN;     // signed leading-order Δ_Q^(M), rad/s (Rabi π-pulse only)
  double hh_estimate = kNaN;      // ħπ²/(4ml²), rad/s
  bool ok = true;
  std::string message;
};

/// Analytic envelope for the scenario: the Rabi π-pulse amplitude or the
/// Ramsey π/2-pulse envelope; NaN for other pulse conditions.
inline double max_shift_envelope(const ScenarioConfig& c) {
  if (c.geometry == Geometry::Rabi && c.pulse.kind == Pulse::Kind::Pi)
    return rabi_max_shift_envelope(c.k(), c.field_width, c.constants);
  if (c.geometry == Geometry::Ramsey && c.pulse.kind == Pulse::Kind::HalfPi)
    return analytic_max_shift_ramsey_envelope(c.k(), c.field_width, c.gap_ratio(), c.constants);
  return kNaN;
}

inline SweepRow evaluate_shift_row(const ScenarioConfig& config, double parameter) {
  SweepRow row;
  row.parameter = parameter;
  row.config = config;
  row.shift = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  try {
    config.validate();
    row.envelope = max_shift_envelope(config);
    if (config.geometry == Geometry::Rabi && config.pulse.kind == Pulse::Kind::Pi)
      row.analytic_max = analytic_max_shift_rabi(config.k(), config.field_width, config.constants);
    row.hh_estimate = half_height_estimate(config.field_width, config.constants);
    row.shift = half_height_shift(config);
  } catch (const SolverError& e) {
    row.ok = false;
    row.message = e.what();
  } catch (const ConfigError& e) {
    row.ok = false;
    row.message = e.what();
  }
  return row;
}

inline std::vector<SweepRow> run_shift_sweep(const SweepSpec& spec, unsigned threads = 1) {
  spec.base.validate();
  const auto values = spec.range.values();
  std::vector<ScenarioConfig> configs;
  configs.reserve(values.size());
  for (double v : values) configs.push_back(apply_parameter(spec.base, spec.variable, v));
  std::vector<SweepRow> rows(values.size());
  parallel_for_index(values.size(), threads, [&](std::size_t i) { rows[i] = evaluate_shift_row(configs[i], values[i]); });
  return rows;
}

struct GridResult {
  std::vector<double> field_widths;  // m
  std::vector<double> gap_ratios;    // N, 0 = Rabi
  double velocity = 0.0;
  PhysicalConstants constants;
  /// cells[i][j] for field_widths[i], gap_ratios[j]
  std::vector<std::vector<SweepRow>> cells;
  bool monotone_in_l = true;
  bool monotone_in_n = true;
};

/// Scenario for one grid cell: Rabi π-pulse at N = 0, Ramsey π/2-pulses otherwise.
inline ScenarioConfig grid_scenario(double l, double n, double v, const PhysicalConstants& c) {
  if (n == 0.0) return ScenarioConfig::rabi(v, l, Pulse::pi(), c);
  return ScenarioConfig::ramsey(v, l, n, Pulse::half_pi(), c);
}

/// Fractional half-height offsets on an l x N grid, with monotone decrease of
/// |Δ_Q^(hh)| checked along both axes (failed cells are skipped).
inline GridResult run_grid(std::span<const double> field_widths, std::span<const double> gap_ratios, double v,
                           const PhysicalConstants& c = PhysicalConstants::cesium(), unsigned threads = 1) {
  if (field_widths.empty() || gap_ratios.empty()) throw ConfigError("grid needs at least one l and one N");
  for (double n : gap_ratios)
    if (!(n >= 0.0)) throw ConfigError("gap ratios must be >= 0");
  GridResult g;
  g.field_widths.assign(field_widths.begin(), field_widths.end());
  g.gap_ratios.assign(gap_ratios.begin(), gap_ratios.end());
  g.velocity = v;
  g.constants = c;
  const std::size_t nl = field_widths.size();
  const std::size_t nn = gap_ratios.size();
  g.cells.assign(nl, std::vector<SweepRow>(nn));
  parallel_for_index(nl * nn, threads, [&](std::size_t idx) {
    const std::size_t i = idx / nn;
    const std::size_t j = idx % nn;
    g.cells[i][j] = evaluate_shift_row(grid_scenario(field_widths[i], gap_ratios[j], v, c), field_widths[i]);
  });

  const auto value = [&](std::size_t i, std::size_t j) -> std::optional<double> {
    const auto& r = g.cells[i][j];
    if (!r.ok) return std::nullopt;
    return r.shift.frac_hh;
  };
  const auto check = [&](bool along_l) {
    const std::size_t outer = along_l ? nn : nl;
    const std::size_t inner = along_l ? nl : nn;
    const auto& axis = along_l ? g.field_widths : g.gap_ratios;
    std::vector<std::size_t> order(inner);
    for (std::size_t t = 0; t < inner; ++t) order[t] = t;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return axis[a] < axis[b]; });
    for (std::size_t o = 0; o < outer; ++o) {
      std::optional<double> prev;
      for (std::size_t t : order) {
        const auto cur = along_l ? value(t, o) : value(o, t);
        if (!cur) continue;
        if (prev && !(*cur < *prev)) return false;
        prev = cur;
      }
    }
    return true;
  };
  g.monotone_in_l = check(true);
  g.monotone_in_n = check(false);
  return g;
}

struct FitResult {
  double c = 0.0;             // amplitude
  double p = 0.0;             // exponent
  double rms_residual = 0.0;  // RMS of log(y) - log(c x^p)
  std::size_t points = 0;
};

struct PowerLawFits {
  FitResult free;          // c, p both fitted
  FitResult inverse_square;  // p fixed at -2
};

/// Least-squares fit of log y = log c + p log x, plus the constrained p = -2 fit.
inline PowerLawFits fit_inverse_square(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("fit requires equally many x and y values");
  const std::size_t n = xs.size();
  if (n < 4) throw ConfigError("fit requires at least 4 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw ConfigError("fit requires finite positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit requires at least two distinct x values");

  const auto rms = [&](double logc, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - (logc + p * lx[i]);
      s += r * r;
    }
    return std::sqrt(s / n);
  };

  PowerLawFits f;
  f.free.p = sxy / sxx;
  const double logc = my - f.free.p * mx;
  f.free.c = std::exp(logc);
  f.free.rms_residual = rms(logc, f.free.p);
  f.free.points = n;

  f.inverse_square.p = -2.0;
  const double logc2 = my + 2.0 * mx;
  f.inverse_square.c = std::exp(logc2);
  f.inverse_square.rms_residual = rms(logc2, -2.0);
  f.inverse_square.points = n;
  return f;
}

}  // namespace qmclock
