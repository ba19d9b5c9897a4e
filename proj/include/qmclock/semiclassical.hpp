#pragma once

// Classical-motion baselines: the Rabi formula and a two-zone Ramsey curve
// composed from rotating-frame 2x2 propagators.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qmclock/error.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/scenario.hpp"

namespace qmclock {

using Mat2 = Eigen::Matrix<cplx, 2, 2>;

/// Ω²/(Ω²+Δ²) sin²(√(Ω²+Δ²) T/2)
inline double rabi_scl(double delta, double omega, double flight_time) {
  if (!(flight_time > 0.0)) throw ConfigError("rabi_scl requires T > 0");
  if (!(omega >= 0.0)) throw ConfigError("rabi_scl requires omega >= 0");
  const double op2 = omega * omega + delta * delta;
  if (op2 == 0.0) return 0.0;
  const double s = std::sin(0.5 * std::sqrt(op2) * flight_time);
  return omega * omega / op2 * s * s;
}

/// exp(-i H τ) for H = [[0, Ω/2], [Ω/2, -Δ]] (units of hbar).
inline Mat2 field_propagator(double delta, double omega, double tau) {
  const double op = std::hypot(delta, omega);
  const cplx i{0.0, 1.0};
  const cplx global = std::polar(1.0, 0.5 * delta * tau);
  Mat2 u;
  if (op == 0.0) {
    u.setIdentity();
  } else {
    const double c = std::cos(0.5 * op * tau);
    const double s = std::sin(0.5 * op * tau);
    const double nx = omega / op;
    const double nz = delta / op;
    u << c - i * s * nz, -i * s * nx,
         -i * s * nx, c + i * s * nz;
  }
  return global * u;
}

/// Free evolution between the zones, diag(1, e^{iΔτ}).
inline Mat2 gap_propagator(double delta, double tau) {
  Mat2 u = Mat2::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = std::polar(1.0, delta * tau);
  return u;
}

/// |<2| U_field U_gap U_field |1>|² with classical transit times.
inline double ramsey_scl(double delta, double omega, double tau_field, double tau_gap) {
  if (!(tau_field > 0.0) || !(tau_gap >= 0.0)) throw ConfigError("ramsey_scl requires positive durations");
  const Mat2 uf = field_propagator(delta, omega, tau_field);
  const Mat2 u = uf * gap_propagator(delta, tau_gap) * uf;
  return std::norm(u(1, 0));
}

/// Semiclassical excitation probability for the scenario's geometry, with
/// T = l/v and τ_gap = L/v.
inline double semiclassical_probability(const ScenarioConfig& config, double delta) {
  const double omega = config.rabi_frequency();
  if (config.geometry == Geometry::Rabi) return rabi_scl(delta, omega, config.flight_time());
  return ramsey_scl(delta, omega, config.flight_time(), config.gap_time());
}

struct SemiclassicalCurve {
  std::vector<double> deltas;
  std::vector<double> p12;
  double flight_time = 0.0;
  Geometry geometry = Geometry::Rabi;
};

inline SemiclassicalCurve semiclassical_curve(const ScenarioConfig& config, std::span<const double> deltas) {
  config.validate();
  SemiclassicalCurve c;
  c.flight_time = config.flight_time();
  c.geometry = config.geometry;
  c.deltas.assign(deltas.begin(), deltas.end());
  c.p12.reserve(deltas.size());
  for (double d : deltas) c.p12.push_back(semiclassical_probability(config, d));
  return c;
}

}  // namespace qmclock
