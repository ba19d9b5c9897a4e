#pragma once

// Quantum-motion shifts of the central resonance fringe: displacement of the
// maximum, half-height midpoint, the low-order Δ expansion of t12 and the
// closed-form estimates they are compared against.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "qmclock/error.hpp"
#include "qmclock/format.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/quadrature.hpp"
#include "qmclock/roots.hpp"
#include "qmclock/scenario.hpp"
#include "qmclock/semiclassical.hpp"
#include "qmclock/transfer_matrix.hpp"

namespace qmclock {

/// Detuning interval holding the central fringe, bounded by the first
/// minima of the semiclassical curve.
struct LobeBracket {
  double left = 0.0;
  double right = 0.0;
  double width() const { return right - left; }
};

struct PeakResult {
  double delta = 0.0;   // rad/s
  double height = 0.0;  // probability
};

struct ShiftResult {
  double delta_max = 0.0;  // Δ_Q^(M), rad/s
  double delta_hh = 0.0;   // Δ_Q^(hh), rad/s
  double frac_max = 0.0;   // |Δ_Q^(M)| / ω0
  double frac_hh = 0.0;    // |Δ_Q^(hh)| / ω0
  double peak_height = 0.0;
  double hh_left = 0.0;
  double hh_right = 0.0;
};

/// ħ²π⁴/(16 m² v l³), the amplitude of the Rabi π-pulse maximum shift.
inline double rabi_max_shift_envelope(double k, double l, const PhysicalConstants& c) {
  const double v = c.velocity(k);
  const double pi4 = std::pow(std::numbers::pi, 4);
  return c.hbar * c.hbar * pi4 / (16.0 * c.mass * c.mass * v * l * l * l);
}

/// Leading-order shift of the Rabi π-pulse maximum, oscillating as sin(2kl).
inline double analytic_max_shift_rabi(double k, double l, const PhysicalConstants& c) {
  return rabi_max_shift_envelope(k, l, c) * std::sin(2.0 * k * l);
}

/// Positive envelope ħ²π²/(16 m² v l³ N) of the Ramsey π/2-pulse maximum shift.
inline double analytic_max_shift_ramsey_envelope(double k, double l, double gap_ratio,
                                                 const PhysicalConstants& c) {
  const double v = c.velocity(k);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return c.hbar * c.hbar * pi2 / (16.0 * c.mass * c.mass * v * l * l * l * gap_ratio);
}

/// Back-of-the-envelope half-height shift ħπ²/(4 m l²) for a Rabi π-pulse.
inline double half_height_estimate(double l, const PhysicalConstants& c) {
  return c.hbar * std::numbers::pi * std::numbers::pi / (4.0 * c.mass * l * l);
}

/// First minima of the semiclassical curve on either side of Δ = 0. The
/// semiclassical curve is even in Δ, so only the right one is searched.
inline LobeBracket central_lobe_bracket(const ScenarioConfig& config) {
  config.validate();
  const double omega = config.rabi_frequency();
  if (config.geometry == Geometry::Rabi && config.pulse.kind == Pulse::Kind::Pi) {
    const double z = std::sqrt(3.0) * omega;
    return {-z, z};
  }
  const double total_time = config.geometry == Geometry::Rabi
                                ? config.flight_time()
                                : 2.0 * config.flight_time() + config.gap_time();
  const double scale = 2.0 * std::numbers::pi / total_time;
  const auto scl = [&](double d) { return semiclassical_probability(config, d); };
  const auto m = first_local_minimum(scl, 0.0, scale / 400.0, 40000, 1e-12 * scale);
  return {-m.x, m.x};
}

/// Maximum of p inside the bracket: golden section to 1e-6 of the bracket
/// width, then the root of a fourth-order central-difference derivative.
template <ScalarFunction F>
PeakResult locate_peak(F&& p, LobeBracket br) {
  const double w = br.width();
  if (!(w > 0.0)) throw ConfigError("locate_peak requires a non-empty bracket");
  const auto g = golden_section_maximize(p, br.left, br.right, 1e-6 * w);
  const double edge = 1e-3 * w;
  if (g.x - br.left < edge || br.right - g.x < edge || !(g.value > std::max(p(br.left), p(br.right))))
    throw BracketError("no interior maximum in the central-lobe bracket (reflection-dominated regime?)");

  const double h = 1e-3 * w;
  const auto slope = [&](double x) { return central_derivative(p, x, h); };
  double half = 1e-5 * w;
  while (half < 0.25 * w) {
    const double lo = g.x - half;
    const double hi = g.x + half;
    if (slope(lo) > 0.0 && slope(hi) < 0.0) {
      const double x = bisect_root(slope, lo, hi, 0.0, 1e-15 * w);
      return {x, p(x)};
    }
    half *= 4.0;
  }
  return {g.x, g.value};
}

/// Half-height crossings on each side of the peak, bisected down to
/// floating-point resolution.
template <ScalarFunction F>
ShiftResult locate_half_height(F&& p, LobeBracket br, PeakResult peak, double omega0) {
  const double half = 0.5 * peak.height;
  const auto g = [&](double x) { return p(x) - half; };
  if (!(g(br.left) < 0.0) || !(g(br.right) < 0.0))
    throw CrossingError("central fringe has no half-height crossing inside the bracket (deformed fringe)");
  ShiftResult r;
  r.delta_max = peak.delta;
  r.peak_height = peak.height;
  r.hh_left = bisect_root(g, br.left, peak.delta, 0.0);
  r.hh_right = bisect_root(g, peak.delta, br.right, 0.0);
  r.delta_hh = 0.5 * (r.hh_left + r.hh_right);
  r.frac_max = std::abs(r.delta_max) / omega0;
  r.frac_hh = std::abs(r.delta_hh) / omega0;
  return r;
}

template <ScalarFunction F>
ShiftResult analyze_curve(F&& p, LobeBracket br, double omega0) {
  const auto peak = locate_peak(p, br);
  return locate_half_height(p, br, peak, omega0);
}

inline auto quantum_probability(const ScenarioConfig& config) {
  return [config](double delta) { return excitation_probability(config, delta); };
}

/// Δ_Q^(M) and the peak height of P12^Q.
inline PeakResult peak_shift(const ScenarioConfig& config) {
  return locate_peak(quantum_probability(config), central_lobe_bracket(config));
}

inline ShiftResult half_height_shift(const ScenarioConfig& config) {
  return analyze_curve(quantum_probability(config), central_lobe_bracket(config), config.constants.omega0);
}

/// t12(Δ) ≈ γ0 + γ1 Δ + γ2 Δ², and the coefficients of the linearized
/// stationarity condition θ0 + θ1 Δ = 0 for (q/k)|t12|².
struct ExpansionCoefficients {
  cplx gamma0{}, gamma1{}, gamma2{};
  double theta0 = 0.0;
  double theta1 = 0.0;
  double q2_hbar_over_m = 0.0;  // q²ħ/m at Δ = 0
  double k = 0.0;
  double two_m_over_hbar = 0.0;
  double step = 0.0;              // finite-difference step used, rad/s
  double richardson_error = 0.0;  // relative change between the last two steps

  static ExpansionCoefficients assemble(cplx g0, cplx g1, cplx g2, double q2_hbar_over_m) {
    ExpansionCoefficients e;
    e.gamma0 = g0;
    e.gamma1 = g1;
    e.gamma2 = g2;
    e.q2_hbar_over_m = q2_hbar_over_m;
    const double cross1 = 2.0 * std::real(g1 * std::conj(g0));
    const double cross2 = 2.0 * std::real(g2 * std::conj(g0));
    e.theta0 = std::norm(g0) + q2_hbar_over_m * cross1;
    e.theta1 = cross1 + 2.0 * q2_hbar_over_m * (std::norm(g1) + cross2);
    return e;
  }

  cplx t12(double delta) const { return gamma0 + delta * (gamma1 + delta * gamma2); }

  /// (q/k)|γ0 + γ1Δ + γ2Δ²|²
  double probability(double delta) const {
    const double ratio2 = 1.0 + two_m_over_hbar * delta / (k * k);
    const double q_over_k = ratio2 > 0.0 ? std::sqrt(ratio2) : 0.0;
    return q_over_k * std::norm(t12(delta));
  }

  double stationary_detuning() const { return -theta0 / theta1; }
};

/// γ0 directly; γ1, γ2 from fourth-order central differences with the step
/// halved until successive estimates agree to `target` (relative to the
/// natural scale |γ0|/s^n with s the inverse total flight time).
inline ExpansionCoefficients gamma_expansion(const ScenarioConfig& config, double target = 1e-8) {
  config.validate();
  const auto t12 = [&](double d) { return scattering_amplitudes(config, d).t12; };
  const double scale = config.velocity / config.span();
  const cplx g0 = t12(0.0);

  struct Estimate {
    cplx d1, d2;
  };
  const auto estimate = [&](double h) {
    const cplx p1 = t12(h), m1 = t12(-h), p2 = t12(2.0 * h), m2 = t12(-2.0 * h);
    return Estimate{(-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h),
                    (-p2 + 16.0 * p1 - 30.0 * g0 + 16.0 * m1 - m2) / (12.0 * h * h)};
  };

  const double norm0 = std::max(std::abs(g0), 1e-300);
  double h = 0.25 * scale;
  Estimate prev = estimate(h);
  Estimate best = prev;
  double best_h = h;
  double best_err = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 24; ++j) {
    const double hn = 0.5 * h;
    const Estimate cur = estimate(hn);
    const double e1 = std::abs(cur.d1 - prev.d1) * scale / std::max(norm0, std::abs(cur.d1) * scale);
    const double e2 = std::abs(cur.d2 - prev.d2) * scale * scale /
                      std::max(norm0, std::abs(cur.d2) * scale * scale);
    const double err = std::max(e1, e2);
    if (err < best_err) {
      best_err = err;
      best = cur;
      best_h = hn;
    }
    if (err <= target) break;
    prev = cur;
    h = hn;
  }
  if (!(best_err <= target))
    throw ConvergenceError("gamma_expansion: Richardson comparison stalled at relative change " +
                           format_double(best_err, 3));

  const double k = config.k();
  auto e = ExpansionCoefficients::assemble(g0, best.d1, 0.5 * best.d2,
                                           k * k * config.constants.hbar / config.constants.mass);
  e.k = k;
  e.two_m_over_hbar = 2.0 * config.constants.mass / config.constants.hbar;
  e.step = best_h;
  e.richardson_error = best_err;
  return e;
}

/// Kinetic energy must exceed this multiple of ħΩ for every velocity class
/// entering a velocity average.
inline constexpr double kPerturbativeEnergyRatio = 2.0;

/// Excitation probability averaged over a Gaussian velocity distribution,
/// with Ω frozen at the value the pulse condition gives for the mean velocity.
class VelocityAveragedProbability {
public:
  VelocityAveragedProbability(const ScenarioConfig& config, double sigma_v, int n_samples) {
    config.validate();
    if (!(sigma_v >= 0.0)) throw ConfigError("sigma_v must be >= 0");
    if (!(sigma_v < config.velocity / 3.0))
      throw ConfigError("velocity spread must satisfy sigma_v < v/3");
    const double omega = config.rabi_frequency();
    if (sigma_v == 0.0 || n_samples <= 1) {
      members_.push_back(config);
      members_.back().pulse = Pulse::explicit_omega(omega);
      velocities_.push_back(config.velocity);
      weights_.push_back(1.0);
      return;
    }
    const auto rule = gauss_hermite_normal(n_samples);
    const double wmax = *std::max_element(rule.weights.begin(), rule.weights.end());
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      if (rule.weights[i] < 1e-15 * wmax) continue;
      const double v = config.velocity + sigma_v * rule.nodes[i];
      if (!(v > 0.0))
        throw ConfigError("velocity distribution reaches v <= 0 (reflection regime)");
      const double kin = config.constants.kinetic_frequency(config.constants.wavenumber(v));
      if (kin < kPerturbativeEnergyRatio * omega)
        throw ConfigError("velocity distribution reaches the reflection-dominated regime");
      ScenarioConfig member = config;
      member.velocity = v;
      member.pulse = Pulse::explicit_omega(omega);
      members_.push_back(member);
      velocities_.push_back(v);
      weights_.push_back(rule.weights[i]);
      total += rule.weights[i];
    }
    for (double& w : weights_) w /= total;
  }

  double operator()(double delta) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i)
      acc += weights_[i] * excitation_probability(members_[i], delta);
    return acc;
  }

  const std::vector<double>& velocities() const { return velocities_; }
  const std::vector<double>& weights() const { return weights_; }

private:
  std::vector<ScenarioConfig> members_;
  std::vector<double> velocities_;
  std::vector<double> weights_;
};

struct VelocityAverage {
  std::vector<double> velocities;
  std::vector<double> weights;
  std::vector<double> deltas;
  std::vector<double> p12;
  ShiftResult shift;
};

/// Averages P12^Q over v' ~ Normal(v, sigma_v) and recomputes both shifts on
/// the averaged curve. The curve is sampled on `grid` when one is given.
inline VelocityAverage velocity_average(const ScenarioConfig& config, double sigma_v, int n_samples,
                                        std::span<const double> grid = {}) {
  const VelocityAveragedProbability avg(config, sigma_v, n_samples);
  VelocityAverage out;
  out.velocities = avg.velocities();
  out.weights = avg.weights();
  out.shift = analyze_curve(avg, central_lobe_bracket(config), config.constants.omega0);
  out.deltas.assign(grid.begin(), grid.end());
  out.p12.reserve(grid.size());
  for (double d : grid) out.p12.push_back(avg(d));
  return out;
}

}  // namespace qmclock
