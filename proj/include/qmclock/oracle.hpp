#pragma once

// Independent route to the scattering amplitudes: the coupled stationary
// Schrödinger equation is integrated numerically instead of being solved
// zone by zone.
//
// The wave function is carried in variation-of-constants form,
//   φ1 = a e^{ikx} + b e^{-ikx},  φ2 = c e^{iqx} + d e^{-iqx},
// with φ' given by the same coefficients differentiated at fixed (a,b,c,d).
// The SSE then reads
//   a' =  g φ2 e^{-ikx}/(2ik),  b' = -g φ2 e^{ikx}/(2ik),
//   c' =  g φ1 e^{-iqx}/(2iq),  d' = -g φ1 e^{iqx}/(2iq),
// with g = mΩ(x)/ħ. Coefficients only move where the field is on, and the
// small reflected components b, d are integrated with their own relative
// error control, so r11 and r12 come out with relative accuracy even when
// they are 1e-4 of the incident amplitude.
//
// Two terminal conditions at the right edge (outgoing ground wave, outgoing
// or decaying excited wave) are integrated leftward to x = 0 and then
// combined so that the incoming wave is a unit ground-state wave.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qmclock/error.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/scenario.hpp"
#include "qmclock/transfer_matrix.hpp"

namespace qmclock {

struct StepControl {
  double rtol = 1e-12;
  double atol = 1e-24;
  long max_steps = 20'000'000;
  /// > 0 switches to fixed steps: this many per field zone.
  long fixed_steps_per_zone = 0;
};

/// (φ1, φ2, φ1', φ2') at position x.
struct OdeState {
  cplx phi1{}, phi2{}, dphi1{}, dphi2{};
  double x = 0.0;

  /// Probability current Im(φ1* φ1') + Im(φ2* φ2'), in units of ħ/m.
  double current() const {
    return std::imag(std::conj(phi1) * dphi1) + std::imag(std::conj(phi2) * dphi2);
  }
};

struct OracleResult {
  ScatteringAmplitudes amplitudes;
  long steps = 0;
  long rejected = 0;
  /// Largest |J(x) - J(x_right)| / k seen along either basis solution.
  double max_current_drift = 0.0;
};

namespace oracle_detail {

using Coeffs = Eigen::Matrix<cplx, 4, 2>;  // columns: the two basis solutions

struct Zone {
  double x_right;
  double x_left;
  double coupling;  // mΩ/ħ, 0 in free regions
};

struct Rhs {
  double k;
  cplx q;

  Coeffs operator()(double x, double g, const Coeffs& y) const {
    Coeffs dy = Coeffs::Zero();
    if (g == 0.0) return dy;
    const cplx i{0.0, 1.0};
    const cplx eik = std::polar(1.0, k * x);
    const cplx emk = std::conj(eik);
    const cplx eiq = std::exp(i * q * x);
    const cplx emq = std::exp(-i * q * x);
    const cplx s1 = g / (2.0 * i * k);
    const cplx s2 = g / (2.0 * i * q);
    for (int c = 0; c < 2; ++c) {
      const cplx phi1 = y(0, c) * eik + y(1, c) * emk;
      const cplx phi2 = y(2, c) * eiq + y(3, c) * emq;
      dy(0, c) = s1 * phi2 * emk;
      dy(1, c) = -s1 * phi2 * eik;
      dy(2, c) = s2 * phi1 * emq;
      dy(3, c) = -s2 * phi1 * eiq;
    }
    return dy;
  }
};

inline OdeState state_from_coeffs(double x, double k, cplx q, const cplx* v) {
  const cplx i{0.0, 1.0};
  const cplx eik = std::polar(1.0, k * x);
  const cplx emk = std::conj(eik);
  const cplx eiq = std::exp(i * q * x);
  const cplx emq = std::exp(-i * q * x);
  OdeState s;
  s.x = x;
  s.phi1 = v[0] * eik + v[1] * emk;
  s.dphi1 = i * k * (v[0] * eik - v[1] * emk);
  s.phi2 = v[2] * eiq + v[3] * emq;
  s.dphi2 = i * q * (v[2] * eiq - v[3] * emq);
  return s;
}

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
inline constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                        e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct StepOutcome {
  Coeffs y;
  Coeffs err;
};

inline StepOutcome dopri_step(const Rhs& f, double x, double g, const Coeffs& y, double h) {
  const Coeffs k1 = f(x, g, y);
  const Coeffs k2 = f(x + c2 * h, g, y + h * a21 * k1);
  const Coeffs k3 = f(x + c3 * h, g, y + h * (a31 * k1 + a32 * k2));
  const Coeffs k4 = f(x + c4 * h, g, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Coeffs k5 = f(x + c5 * h, g, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Coeffs k6 = f(x + h, g, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const Coeffs yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Coeffs k7 = f(x + h, g, yn);
  const Coeffs err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {yn, err};
}

inline double error_norm(const Coeffs& y, const Coeffs& yn, const Coeffs& err, const StepControl& sc) {
  double worst = 0.0;
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 4; ++r) {
      const double scale = sc.atol + sc.rtol * std::max(std::abs(y(r, c)), std::abs(yn(r, c)));
      worst = std::max(worst, std::abs(err(r, c)) / scale);
    }
  return worst;
}

inline std::vector<Zone> zones(const ScenarioConfig& config) {
  const double l = config.field_width;
  const double g = config.constants.mass * config.rabi_frequency() / config.constants.hbar;
  if (config.geometry == Geometry::Rabi) return {{l, 0.0, g}};
  const double gap = config.gap;
  return {{2.0 * l + gap, l + gap, g}, {l + gap, l, 0.0}, {l, 0.0, g}};
}

}  // namespace oracle_detail

inline OracleResult integrate_sse_detailed(const ScenarioConfig& config, double delta,
                                           const StepControl& control = {}) {
  using namespace oracle_detail;
  config.validate();
  const auto wn = channel_wavenumbers(config.k(), delta, config.rabi_frequency(), config.constants);
  const double k = wn.k;
  const cplx q = wn.q;
  if (detail::at_threshold(q, k)) throw ThresholdError("oracle: excited channel at threshold (q = 0)");

  const Rhs f{k, q};
  Coeffs y = Coeffs::Zero();
  y(0, 0) = 1.0;  // outgoing ground wave
  y(2, 1) = 1.0;  // outgoing (or decaying) excited wave

  OracleResult out;
  const auto current_of = [&](double x, int col) {
    const cplx v[4] = {y(0, col), y(1, col), y(2, col), y(3, col)};
    return state_from_coeffs(x, k, q, v).current();
  };
  const double x_right = config.span();
  const std::array<double, 2> j0 = {current_of(x_right, 0), current_of(x_right, 1)};
  const auto track_current = [&](double x) {
    for (int col = 0; col < 2; ++col)
      out.max_current_drift = std::max(out.max_current_drift, std::abs(current_of(x, col) - j0[col]) / k);
  };

  for (const Zone& z : zones(config)) {
    const double length = z.x_right - z.x_left;
    double x = z.x_right;
    if (control.fixed_steps_per_zone > 0) {
      const long n = z.coupling == 0.0 ? 1 : control.fixed_steps_per_zone;
      const double h = -length / static_cast<double>(n);
      for (long s = 0; s < n; ++s) {
        y = dopri_step(f, x, z.coupling, y, h).y;
        x = (s + 1 == n) ? z.x_left : x + h;
        ++out.steps;
        track_current(x);
      }
      continue;
    }
    const double fastest = std::max({k, std::abs(q), std::abs(wn.k_plus), std::abs(wn.k_minus)});
    double h = -std::min(length, 0.05 / fastest);
    while (x > z.x_left) {
      if (out.steps + out.rejected > control.max_steps)
        throw ConvergenceError("oracle: step budget exhausted");
      bool last = false;
      if (x + h <= z.x_left) {
        h = z.x_left - x;
        last = true;
      }
      if (!last && std::abs(h) < 1e-13 * length) throw ConvergenceError("oracle: step size underflow");
      const auto step = dopri_step(f, x, z.coupling, y, h);
      const double err = error_norm(y, step.y, step.err, control);
      if (err <= 1.0) {
        y = step.y;
        x = last ? z.x_left : x + h;
        ++out.steps;
        track_current(x);
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= grow;
      } else {
        ++out.rejected;
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      }
    }
  }

  // Impose v_I = (1, r11, 0, r12): unit incoming ground wave, no incoming
  // excited wave.
  const cplx det = y(0, 0) * y(2, 1) - y(0, 1) * y(2, 0);
  const double size = std::max({std::abs(y(0, 0) * y(2, 1)), std::abs(y(0, 1) * y(2, 0)), 1e-300});
  if (!(std::abs(det) > 1e-12 * size)) throw SolverError("oracle: ill-conditioned matching system");
  const cplx alpha = y(2, 1) / det;
  const cplx beta = -y(2, 0) / det;

  auto& a = out.amplitudes;
  a.t11 = alpha;
  a.t12 = beta;
  a.r11 = alpha * y(1, 0) + beta * y(1, 1);
  a.r12 = alpha * y(3, 0) + beta * y(3, 1);
  a.excited_flux_weight = wn.excited_flux_weight();
  return out;
}

inline ScatteringAmplitudes integrate_sse(const ScenarioConfig& config, double delta,
                                          const StepControl& control = {}) {
  return integrate_sse_detailed(config, delta, control).amplitudes;
}

}  // namespace qmclock
