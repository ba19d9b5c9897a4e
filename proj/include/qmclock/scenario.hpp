#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "qmclock/error.hpp"
#include "qmclock/format.hpp"
#include "qmclock/physics.hpp"

namespace qmclock {

enum class Geometry { Rabi, Ramsey };

inline const char* to_string(Geometry g) { return g == Geometry::Rabi ? "rabi" : "ramsey"; }

/// Field strength, either an explicit Rabi frequency or the semiclassical
/// resonant pulse-area condition at the scenario velocity.
struct Pulse {
  enum class Kind { Pi, HalfPi, Explicit };
  Kind kind = Kind::Pi;
  double omega = 0.0;  // rad/s, only for Kind::Explicit

  static Pulse pi() { return {Kind::Pi, 0.0}; }
  static Pulse half_pi() { return {Kind::HalfPi, 0.0}; }
  static Pulse explicit_omega(double omega) { return {Kind::Explicit, omega}; }

  std::string label() const {
    switch (kind) {
      case Kind::Pi: return "pi";
      case Kind::HalfPi: return "pi2";
      case Kind::Explicit: break;
    }
    return "omega=" + format_short(omega);
  }
};

/// Physical setup. Field 1 occupies [0, l]; for Ramsey field 2 occupies
/// [l + L, 2l + L].
struct ScenarioConfig {
  PhysicalConstants constants{};
  double velocity = 0.0;     // m/s
  double field_width = 0.0;  // l, m
  double gap = 0.0;          // L, m (0 for Rabi)
  Pulse pulse = Pulse::pi();
  Geometry geometry = Geometry::Rabi;

  static ScenarioConfig rabi(double v, double l, Pulse p = Pulse::pi(),
                             PhysicalConstants c = PhysicalConstants::cesium()) {
    return {c, v, l, 0.0, p, Geometry::Rabi};
  }

  /// Two zones of width l separated by L = N l.
  static ScenarioConfig ramsey(double v, double l, double gap_ratio, Pulse p = Pulse::half_pi(),
                               PhysicalConstants c = PhysicalConstants::cesium()) {
    return {c, v, l, gap_ratio * l, p, Geometry::Ramsey};
  }

  void validate() const {
    constants.validate();
    if (!(velocity > 0.0) || !std::isfinite(velocity)) throw ConfigError("velocity must be > 0");
    if (!(field_width > 0.0) || !std::isfinite(field_width))
      throw ConfigError("field width must be > 0");
    if (geometry == Geometry::Ramsey && !(gap > 0.0))
      throw ConfigError("ramsey geometry requires a gap L > 0");
    if (geometry == Geometry::Rabi && gap != 0.0)
      throw ConfigError("rabi geometry requires L = 0");
    if (pulse.kind == Pulse::Kind::Explicit && !(pulse.omega >= 0.0 && std::isfinite(pulse.omega)))
      throw ConfigError("explicit Rabi frequency must be >= 0");
  }

  double k() const { return constants.wavenumber(velocity); }
  double gap_ratio() const { return gap / field_width; }

  /// Ω resolved from the pulse condition: π-pulse hbar k π/(l m), π/2-pulse half of it.
  double rabi_frequency() const {
    const double pi_pulse = constants.hbar * k() * std::numbers::pi / (field_width * constants.mass);
    switch (pulse.kind) {
      case Pulse::Kind::Pi: return pi_pulse;
      case Pulse::Kind::HalfPi: return 0.5 * pi_pulse;
      case Pulse::Kind::Explicit: break;
    }
    return pulse.omega;
  }

  /// Classical in-field flight time T = l m /(hbar k) = l / v.
  double flight_time() const { return field_width / velocity; }
  double gap_time() const { return gap / velocity; }
  double span() const { return geometry == Geometry::Rabi ? field_width : 2.0 * field_width + gap; }
};

}  // namespace qmclock
