#pragma once

// Physical constants, dressed-state algebra and channel wavenumbers for a
// two-level atom moving through piecewise-constant field zones.
//
// Units are SI throughout: wavenumbers in 1/m, detunings and Rabi
// frequencies in rad/s, masses in kg. The dimensionless preset sets
// hbar = m = 1 and is a pure rescaling.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "qmclock/error.hpp"

namespace qmclock {

using cplx = std::complex<double>;

inline constexpr double kHbarSI = 1.054571817e-34;
inline constexpr double kCesiumMass = 2.2e-25;
inline constexpr double kCesiumHyperfineHz = 9'192'631'770.0;

inline constexpr double to_hz(double rad_per_s) { return rad_per_s / (2.0 * std::numbers::pi); }
inline constexpr double from_hz(double hz) { return hz * 2.0 * std::numbers::pi; }

struct PhysicalConstants {
  double hbar = kHbarSI;
  double mass = kCesiumMass;
  double omega0 = 2.0 * std::numbers::pi * kCesiumHyperfineHz;

  static PhysicalConstants cesium() { return {}; }

  /// hbar = m = 1; omega0 = 1 so fractional offsets equal the raw shift.
  static PhysicalConstants dimensionless() { return {1.0, 1.0, 1.0}; }

  void validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0) || !(omega0 > 0.0) || !std::isfinite(hbar) ||
        !std::isfinite(mass) || !std::isfinite(omega0))
      throw ConfigError("physical constants must be finite and strictly positive");
  }

  double wavenumber(double velocity) const { return mass * velocity / hbar; }
  double velocity(double k) const { return hbar * k / mass; }
  /// Kinetic energy over hbar, i.e. hbar k^2 / (2m), in rad/s.
  double kinetic_frequency(double k) const { return hbar * k * k / (2.0 * mass); }
};

/// Eigen-decomposition of the internal coupling block [[0, Ω/2], [Ω/2, -Δ]].
struct DressedPair {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double omega_prime = 0.0;
  double omega = 0.0;
  std::array<double, 2> eigvec_plus{1.0, 0.0};
  std::array<double, 2> eigvec_minus{1.0, 0.0};

  /// Second component of |λ±>, i.e. 2λ±/Ω.
  double weight_plus() const { return eigvec_plus[1]; }
  double weight_minus() const { return eigvec_minus[1]; }
};

namespace detail {

/// λ± = (-Δ ± Ω')/2, with the small root taken from λ+λ- = -Ω²/4 so neither
/// loses digits when |Δ| ≫ Ω. Valid for Ω ≥ 0.
inline std::array<double, 2> coupling_eigenvalues(double delta, double omega) {
  const double omega_prime = std::hypot(delta, omega);
  double lp = 0.0;
  double lm = 0.0;
  if (delta >= 0.0) {
    lm = 0.5 * (-delta - omega_prime);
    lp = (lm != 0.0) ? -0.25 * omega * omega / lm : 0.0;
  } else {
    lp = 0.5 * (-delta + omega_prime);
    lm = -0.25 * omega * omega / lp;
  }
  return {lp, lm};
}

/// Square root of a real w² on the branch Im ≥ 0. Real inputs give an exactly
/// real result; negative inputs an exactly imaginary one.
inline cplx branch_sqrt(double w2) {
  if (w2 >= 0.0) return {std::sqrt(w2), 0.0};
  return {0.0, std::sqrt(-w2)};
}

}  // namespace detail

/// Complex square root on the branch Im ≥ 0 (evanescent waves decay along +x).
inline cplx branch_sqrt(cplx z) {
  if (z.imag() == 0.0) return detail::branch_sqrt(z.real());
  cplx w = std::sqrt(z);
  if (w.imag() < 0.0) w = -w;
  return w;
}

inline DressedPair dressed_pair(double delta, double omega) {
  if (!(omega > 0.0))
    throw ConfigError("dressed_pair requires omega > 0; use the free-region path for omega = 0");
  const auto [lp, lm] = detail::coupling_eigenvalues(delta, omega);
  DressedPair dp;
  dp.lambda_plus = lp;
  dp.lambda_minus = lm;
  dp.omega_prime = std::hypot(delta, omega);
  dp.omega = omega;
  dp.eigvec_plus = {1.0, 2.0 * lp / omega};
  dp.eigvec_minus = {1.0, 2.0 * lm / omega};
  return dp;
}

/// Ground-channel wavenumber k, excited-channel q and in-field mode
/// wavenumbers k±. The *_offset members hold w - k computed without
/// cancellation; phase factors e^{iwx} are built from e^{ikx} e^{i(w-k)x} so
/// that relative phases between channels stay accurate when kx is large.
struct ChannelWavenumbers {
  double k = 0.0;
  cplx q{};
  cplx k_plus{};
  cplx k_minus{};
  cplx q_offset{};
  cplx k_plus_offset{};
  cplx k_minus_offset{};

  bool excited_open() const { return q.imag() == 0.0 && q.real() > 0.0; }
  /// Flux weight Re(q)/k of the excited channel; zero when closed.
  double excited_flux_weight() const { return excited_open() ? q.real() / k : 0.0; }
};

namespace detail {

/// w - k for w² = k² + shift, with w on the Im ≥ 0 branch.
inline cplx wavenumber_offset(double k, cplx w, double shift) {
  if (w.imag() == 0.0) return {shift / (w.real() + k), 0.0};
  return w - k;
}

}  // namespace detail

inline ChannelWavenumbers channel_wavenumbers(double k, double delta, double omega,
                                              const PhysicalConstants& c) {
  if (!(k > 0.0)) throw ConfigError("channel_wavenumbers requires k > 0");
  const double scale = 2.0 * c.mass / c.hbar;
  const auto [lp, lm] = detail::coupling_eigenvalues(delta, omega);

  ChannelWavenumbers wn;
  wn.k = k;
  const double q_shift = scale * delta;
  const double kp_shift = -scale * lp;
  const double km_shift = -scale * lm;
  wn.q = detail::branch_sqrt(k * k + q_shift);
  wn.k_plus = detail::branch_sqrt(k * k + kp_shift);
  wn.k_minus = detail::branch_sqrt(k * k + km_shift);
  wn.q_offset = detail::wavenumber_offset(k, wn.q, q_shift);
  wn.k_plus_offset = detail::wavenumber_offset(k, wn.k_plus, kp_shift);
  wn.k_minus_offset = detail::wavenumber_offset(k, wn.k_minus, km_shift);
  return wn;
}

/// Raman detuning corrected by the recoil term hbar k_L² / (2m).
inline double effective_detuning(double laser_detuning, double k_laser, const PhysicalConstants& c) {
  return laser_detuning - c.hbar * k_laser * k_laser / (2.0 * c.mass);
}

/// Time resolution hbar/E of an ideal quantum stopwatch, E = m v² / 2.
inline double peres_bound(double velocity, const PhysicalConstants& c) {
  if (!(velocity > 0.0)) throw ConfigError("peres_bound requires v > 0");
  return c.hbar / (0.5 * c.mass * velocity * velocity);
}

}  // namespace qmclock
