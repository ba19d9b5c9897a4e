// Cesium fountain numbers: Rabi and Ramsey shifts at a few velocities, the
// half-height offset and the stopwatch bound.

#include <cstdio>

#include "qmclock/experiments.hpp"
#include "qmclock/shift_analysis.hpp"
#include "qmclock/transfer_matrix.hpp"

int main() {
  using namespace qmclock;
  const auto cs = PhysicalConstants::cesium();
  const double l = 3e-3;

  std::printf("Rabi pi pulse, l = %.1f mm\n", l * 1e3);
  std::printf("%10s %14s %14s %14s\n", "v [m/s]", "dmax [rad/s]", "envelope", "dhh [rad/s]");
  for (double v : {0.01, 0.05, 0.25}) {
    const auto cfg = ScenarioConfig::rabi(v, l);
    const auto s = half_height_shift(cfg);
    std::printf("%10.3g %14.5g %14.5g %14.5g\n", v, s.delta_max, max_shift_envelope(cfg), s.delta_hh);
  }

  std::printf("\nRamsey pi/2 pulses, l = %.1f mm, N = 10\n", l * 1e3);
  for (double v : {0.01, 0.05, 0.25}) {
    const auto cfg = ScenarioConfig::ramsey(v, l, 10.0);
    const auto s = half_height_shift(cfg);
    std::printf("%10.3g %14.5g %14.5g %14.5g\n", v, s.delta_max, max_shift_envelope(cfg), s.delta_hh);
  }

  const auto cfg = ScenarioConfig::rabi(0.05, l);
  std::printf("\nP12 at resonance: %.6f\n", excitation_probability(cfg, 0.0));
  std::printf("half-height estimate hbar pi^2/(4 m l^2): %.4g rad/s\n", half_height_estimate(l, cs));
  std::printf("stopwatch hbar/E at 200 m/s: %.4g s\n", cs.hbar / (0.5 * cs.mass * 200.0 * 200.0));
  return 0;
}
