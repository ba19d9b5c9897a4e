#pragma once

// Region matrices, block transfer matrices and scattering amplitudes for a
// ground-state atom incident from the left on one (Rabi) or two (Ramsey)
// constant-field zones.
//
// Coefficient vectors are ordered (a, b, c, d): forward/backward ground
// waves then forward/backward excited waves outside the field, and
// forward/backward |λ+> then |λ-> modes inside it. Rows of a region matrix
// are (φ1, φ2, φ1', φ2').

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "qmclock/diagnostics.hpp"
#include "qmclock/error.hpp"
#include "qmclock/format.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/scenario.hpp"

namespace qmclock {

using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;

inline const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

/// |w|² ≤ tol·k² counts as sitting on a threshold.
inline constexpr double kThresholdTolerance = 1e-12;
inline constexpr double kConditionWarning = 1e8;
/// Largest Im(w)·span before products of region matrices lose more than
/// about eight digits to evanescent growth.
inline constexpr double kEvanescentWarning = 18.0;

enum class RegionKind { Free, Field };

struct RegionMatrix {
  Mat4 entries = Mat4::Zero();
  RegionKind kind = RegionKind::Free;
  double x = 0.0;
};

/// Maps the right-hand coefficient vector onto the left-hand one:
/// v_left = T v_right.
struct TransferMatrix {
  Mat4 entries = Mat4::Identity();
  double x_left = 0.0;
  double x_right = 0.0;

  TransferMatrix operator*(const TransferMatrix& rhs) const {
    return {entries * rhs.entries, x_left, rhs.x_right};
  }
};

struct ScatteringAmplitudes {
  cplx r11{}, r12{}, t11{}, t12{};
  double excited_flux_weight = 0.0;  // Re(q)/k, 0 for a closed excited channel

  double excitation_probability() const { return excited_flux_weight * std::norm(t12); }
  double reflection_probability() const {
    return std::norm(r11) + excited_flux_weight * std::norm(r12);
  }
  double transmission_probability() const { return std::norm(t11) + excitation_probability(); }
  double flux_sum() const { return reflection_probability() + transmission_probability(); }
};

namespace detail {

struct WavePair {
  cplx forward;   // e^{iwx}
  cplx backward;  // e^{-iwx}
};

/// e^{±iwx}, with e^{iwx} = e^{ikx} e^{i(w-k)x} for propagating w.
inline WavePair wave_pair(double k, cplx w, cplx offset, double x) {
  if (w.imag() == 0.0) {
    const cplx f = std::polar(1.0, k * x) * std::polar(1.0, offset.real() * x);
    return {f, std::conj(f)};
  }
  // Purely evanescent (w = i|w|) or generic complex w.
  const cplx i{0.0, 1.0};
  return {std::exp(i * w * x), std::exp(-i * w * x)};
}

inline WavePair ground_waves(const ChannelWavenumbers& wn, double x) {
  const cplx f = std::polar(1.0, wn.k * x);
  return {f, std::conj(f)};
}
inline WavePair excited_waves(const ChannelWavenumbers& wn, double x) {
  return wave_pair(wn.k, wn.q, wn.q_offset, x);
}
inline WavePair plus_waves(const ChannelWavenumbers& wn, double x) {
  return wave_pair(wn.k, wn.k_plus, wn.k_plus_offset, x);
}
inline WavePair minus_waves(const ChannelWavenumbers& wn, double x) {
  return wave_pair(wn.k, wn.k_minus, wn.k_minus_offset, x);
}

inline bool at_threshold(cplx w, double k) { return std::norm(w) <= kThresholdTolerance * k * k; }

/// diag(e^{ikx}, e^{-ikx}, e^{iqx}, e^{-iqx}); M0(x) = M0(0) D0(x).
inline Mat4 free_phases(const ChannelWavenumbers& wn, double x) {
  const auto g = ground_waves(wn, x);
  const auto e = excited_waves(wn, x);
  Mat4 d = Mat4::Zero();
  d(0, 0) = g.forward;
  d(1, 1) = g.backward;
  d(2, 2) = e.forward;
  d(3, 3) = e.backward;
  return d;
}

/// diag(e^{ik+x}, e^{-ik+x}, e^{ik-x}, e^{-ik-x}); Mb(x) = Mb(0) Db(x).
inline Mat4 field_phases(const ChannelWavenumbers& wn, double x) {
  const auto p = plus_waves(wn, x);
  const auto m = minus_waves(wn, x);
  Mat4 d = Mat4::Zero();
  d(0, 0) = p.forward;
  d(1, 1) = p.backward;
  d(2, 2) = m.forward;
  d(3, 3) = m.backward;
  return d;
}

/// Solves a X = b by LU with partial pivoting on the row- and
/// column-equilibrated system, so the conditioning check does not depend on
/// the units of the derivative rows.
inline Mat4 solve_checked(const Mat4& a, const Mat4& b, const char* what) {
  Eigen::Matrix<double, 4, 1> r, c;
  for (int i = 0; i < 4; ++i) {
    const double m = a.row(i).cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) throw ThresholdError(std::string("singular ") + what + " matrix");
    r(i) = 1.0 / m;
  }
  const Mat4 ar = r.asDiagonal() * a;
  for (int j = 0; j < 4; ++j) {
    const double m = ar.col(j).cwiseAbs().maxCoeff();
    if (!(m > 0.0)) throw ThresholdError(std::string("singular ") + what + " matrix");
    c(j) = 1.0 / m;
  }
  const Mat4 scaled = ar * c.asDiagonal();
  Eigen::PartialPivLU<Mat4> lu(scaled);
  const double rc = lu.rcond();
  if (!(rc > 0.0) || !std::isfinite(rc))
    throw ThresholdError(std::string("singular ") + what + " matrix");
  if (1.0 / rc > kConditionWarning)
    diagnose(std::string("ill-conditioned ") + what + " matrix, cond ~ " + format_double(1.0 / rc, 3));
  Mat4 x = c.asDiagonal() * lu.solve(r.asDiagonal() * b);
  if (!x.allFinite()) throw SolverError(std::string("non-finite solve of ") + what + " matrix");
  return x;
}

}  // namespace detail

inline RegionMatrix m0_matrix(double x, const ChannelWavenumbers& wn) {
  if (!(wn.k > 0.0)) throw ConfigError("m0_matrix requires k > 0");
  if (detail::at_threshold(wn.q, wn.k))
    throw ThresholdError("excited channel at threshold (q = 0): free-region matrix is singular");
  const cplx i{0.0, 1.0};
  const auto g = detail::ground_waves(wn, x);
  const auto e = detail::excited_waves(wn, x);
  const cplx ik = i * wn.k;
  const cplx iq = i * wn.q;

  RegionMatrix m;
  m.kind = RegionKind::Free;
  m.x = x;
  auto& a = m.entries;
  a << g.forward, g.backward, 0.0, 0.0,
       0.0, 0.0, e.forward, e.backward,
       ik * g.forward, -ik * g.backward, 0.0, 0.0,
       0.0, 0.0, iq * e.forward, -iq * e.backward;
  a *= kInvSqrt2Pi;
  return m;
}

/// Free-region matrix from a bare (k, q) pair.
inline RegionMatrix m0_matrix(double x, double k, cplx q) {
  ChannelWavenumbers wn;
  wn.k = k;
  wn.q = q;
  wn.q_offset = q - k;
  return m0_matrix(x, wn);
}

inline RegionMatrix mb_matrix(double x, const ChannelWavenumbers& wn, const DressedPair& dp) {
  if (!(dp.omega > 0.0)) throw ConfigError("mb_matrix requires omega > 0");
  if (detail::at_threshold(wn.k_plus, wn.k) || detail::at_threshold(wn.k_minus, wn.k))
    throw ThresholdError("dressed mode at threshold (k± = 0): field-region matrix is singular");
  const cplx i{0.0, 1.0};
  const auto p = detail::plus_waves(wn, x);
  const auto m = detail::minus_waves(wn, x);
  const double wp = dp.weight_plus();
  const double wm = dp.weight_minus();
  const cplx ikp = i * wn.k_plus;
  const cplx ikm = i * wn.k_minus;

  RegionMatrix r;
  r.kind = RegionKind::Field;
  r.x = x;
  auto& a = r.entries;
  a << p.forward, p.backward, m.forward, m.backward,
       wp * p.forward, wp * p.backward, wm * m.forward, wm * m.backward,
       ikp * p.forward, -ikp * p.backward, ikm * m.forward, -ikm * m.backward,
       wp * ikp * p.forward, -wp * ikp * p.backward, wm * ikm * m.forward, -wm * ikm * m.backward;
  a *= kInvSqrt2Pi;
  return r;
}

namespace detail {

/// M0(0)^{-1} Mb(0) Db(-w) Mb(0)^{-1} M0(0): the field block of width w with
/// both edges moved to the origin.
inline Mat4 field_block_core(double width, const ChannelWavenumbers& wn, const DressedPair& dp) {
  const Mat4 m0 = m0_matrix(0.0, wn).entries;
  const Mat4 mb = mb_matrix(0.0, wn, dp).entries;
  const Mat4 left = solve_checked(m0, mb, "free-region");
  const Mat4 right = solve_checked(mb, m0, "field-region");
  return left * field_phases(wn, -width) * right;
}

}  // namespace detail

/// T(x1, x2) = M0(x1)^{-1} Mb(x1) Mb(x2)^{-1} M0(x2) for a field occupying
/// [x1, x2]. Evaluated as D0(-x1) · core(x2 - x1) · D0(x2), which is the same
/// product with the edge phases factored out of the solves.
inline TransferMatrix block_transfer(double x1, double x2, const ChannelWavenumbers& wn,
                                     const DressedPair& dp) {
  if (!(x2 > x1)) throw ConfigError("block_transfer requires x2 > x1");
  const Mat4 core = detail::field_block_core(x2 - x1, wn, dp);
  return {detail::free_phases(wn, -x1) * core * detail::free_phases(wn, x2), x1, x2};
}

/// Transfer matrix of the whole scenario at detuning Δ. The Ramsey product
/// T(0, l) T(l+L, 2l+L) is assembled with the gap phases merged into D0(-L).
inline TransferMatrix total_transfer(const ScenarioConfig& config, double delta) {
  config.validate();
  const double omega = config.rabi_frequency();
  const double l = config.field_width;
  const auto wn = channel_wavenumbers(config.k(), delta, omega, config.constants);
  if (detail::at_threshold(wn.q, wn.k))
    throw ThresholdError("excited channel at threshold (q = 0)");
  if (omega == 0.0) return {Mat4::Identity(), 0.0, config.span()};

  const double growth = std::max(wn.k_plus.imag(), wn.k_minus.imag()) * l +
                        (config.geometry == Geometry::Ramsey ? std::max(wn.q.imag() * config.gap,
                                                                        std::max(wn.k_plus.imag(), wn.k_minus.imag()) * l)
                                                             : 0.0);
  if (growth > kEvanescentWarning)
    diagnose("evanescent growth e^" + format_double(growth, 3) + " in transfer matrix; amplitudes lose ~" +
             format_double(growth / std::log(10.0), 2) + " digits");

  const auto dp = dressed_pair(delta, omega);
  const Mat4 core = detail::field_block_core(l, wn, dp);
  if (config.geometry == Geometry::Rabi) return {core * detail::free_phases(wn, l), 0.0, l};

  const double gap = config.gap;
  const Mat4 t = core * detail::free_phases(wn, -gap) * core * detail::free_phases(wn, 2.0 * l + gap);
  return {t, 0.0, config.span()};
}

/// Solves v_I = T v_III with v_I = (1, r11, 0, r12) and v_III = (t11, 0, t12, 0).
inline ScatteringAmplitudes scattering_amplitudes(const TransferMatrix& tm, const ChannelWavenumbers& wn) {
  const Mat4& t = tm.entries;
  if (!t.allFinite()) throw SolverError("non-finite transfer matrix");
  const cplx den = t(2, 0) * t(0, 2) - t(2, 2) * t(0, 0);
  const double scale = std::abs(t(2, 0) * t(0, 2)) + std::abs(t(2, 2) * t(0, 0));
  if (!(std::abs(den) > 1e-14 * scale))
    throw SolverError("near-singular amplitude denominator T31 T13 - T33 T11 (threshold or degeneracy)");

  ScatteringAmplitudes s;
  s.t12 = t(2, 0) / den;
  s.t11 = -t(2, 2) / den;
  s.r11 = t(1, 0) * s.t11 + t(1, 2) * s.t12;
  s.r12 = t(3, 0) * s.t11 + t(3, 2) * s.t12;
  s.excited_flux_weight = wn.excited_flux_weight();
  return s;
}

inline ScatteringAmplitudes scattering_amplitudes(const ScenarioConfig& config, double delta) {
  const auto wn = channel_wavenumbers(config.k(), delta, config.rabi_frequency(), config.constants);
  return scattering_amplitudes(total_transfer(config, delta), wn);
}

/// P12^Q(Δ) = (q/k)|t12|²; zero without coupling or when the excited
/// channel is closed.
inline double excitation_probability(const ScenarioConfig& config, double delta) {
  config.validate();
  const double omega = config.rabi_frequency();
  if (omega == 0.0) return 0.0;
  const auto wn = channel_wavenumbers(config.k(), delta, omega, config.constants);
  if (detail::at_threshold(wn.q, wn.k))
    throw ThresholdError("excited channel at threshold (q = 0)");
  if (!wn.excited_open()) return 0.0;
  return scattering_amplitudes(total_transfer(config, delta), wn).excitation_probability();
}

}  // namespace qmclock
