#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmclock/oracle.hpp"
#include "qmclock/transfer_matrix.hpp"

using namespace qmclock;

namespace {

constexpr double kPi = std::numbers::pi;
const PhysicalConstants kUnit = PhysicalConstants::dimensionless();

double rel_err(cplx a, cplx ref) { return std::abs(a - ref) / std::abs(ref); }

}  // namespace

TEST(Oracle, FreePropagation) {
  const auto cfg = ScenarioConfig::rabi(20.0, 1.0, Pulse::explicit_omega(0.0), kUnit);
  const auto a = integrate_sse(cfg, 0.7);
  EXPECT_NEAR(std::abs(a.t11), 1.0, 1e-10);
  EXPECT_LE(std::abs(a.t12), 1e-10);
  // Coefficients are referenced to the absolute coordinate, so free flight adds no phase.
  EXPECT_LE(std::abs(a.t11 - scattering_amplitudes(cfg, 0.7).t11), 1e-10);
}

TEST(Oracle, MatchesTransferMatrixDimensionless) {
  const auto cfg = ScenarioConfig::rabi(20.0, 1.0, Pulse::pi(), kUnit);
  const double omega = cfg.rabi_frequency();
  EXPECT_NEAR(omega, 20.0 * kPi, 1e-12);
  for (double d : {0.0, 0.5 * omega, -0.5 * omega}) {
    const auto o = integrate_sse(cfg, d);
    const auto t = scattering_amplitudes(cfg, d);
    EXPECT_LE(rel_err(o.t12, t.t12), 1e-8) << "delta = " << d;
    EXPECT_LE(rel_err(o.t11, t.t11), 1e-8) << "delta = " << d;
    EXPECT_LE(rel_err(o.r11, t.r11), 1e-7) << "delta = " << d;
    EXPECT_LE(rel_err(o.r12, t.r12), 1e-7) << "delta = " << d;
    EXPECT_NEAR(o.flux_sum(), 1.0, 1e-9);
  }
}

TEST(Oracle, MatchesTransferMatrixRamseyCesium) {
  const auto cfg = ScenarioConfig::ramsey(5e-6, 1.5e-3, 5.0);
  const double d = 0.3 * cfg.rabi_frequency();
  const auto o = integrate_sse(cfg, d);
  const auto t = scattering_amplitudes(cfg, d);
  EXPECT_LE(rel_err(o.t12, t.t12), 1e-8);
  EXPECT_LE(rel_err(o.r11, t.r11), 1e-7);
}

TEST(Oracle, ClosedExcitedChannel) {
  const auto cfg = ScenarioConfig::rabi(6.0, 1.0, Pulse::explicit_omega(3.0), kUnit);
  const double d = -cfg.constants.kinetic_frequency(cfg.k()) - 4.0;
  const auto o = integrate_sse(cfg, d);
  const auto t = scattering_amplitudes(cfg, d);
  EXPECT_EQ(o.excited_flux_weight, 0.0);
  EXPECT_LE(rel_err(o.t11, t.t11), 1e-8);
  EXPECT_LE(rel_err(o.r11, t.r11), 1e-7);
  EXPECT_NEAR(o.flux_sum(), 1.0, 1e-9);
}

TEST(Oracle, CurrentIsConservedAlongIntegration) {
  const auto cfg = ScenarioConfig::rabi(20.0, 1.0, Pulse::pi(), kUnit);
  const auto r = integrate_sse_detailed(cfg, 3.0);
  EXPECT_LE(r.max_current_drift, 1e-9);
  EXPECT_GT(r.steps, 10);
}

TEST(Oracle, FixedStepConvergenceOrder) {
  const auto cfg = ScenarioConfig::rabi(20.0, 1.0, Pulse::pi(), kUnit);
  const cplx ref = scattering_amplitudes(cfg, 5.0).t12;
  const auto err = [&](long n) {
    StepControl sc;
    sc.fixed_steps_per_zone = n;
    return std::abs(integrate_sse(cfg, 5.0, sc).t12 - ref);
  };
  const double e1 = err(100), e2 = err(200), e3 = err(400);
  EXPECT_GE(std::log2(e1 / e2), 4.0);
  EXPECT_GE(std::log2(e2 / e3), 4.0);
}

TEST(Oracle, ReportsThresholdAndBudget) {
  const auto cfg = ScenarioConfig::rabi(2.0, 1.0, Pulse::explicit_omega(0.5), kUnit);
  EXPECT_THROW(integrate_sse(cfg, -2.0), ThresholdError);
  StepControl sc;
  sc.max_steps = 5;
  EXPECT_THROW(integrate_sse(ScenarioConfig::rabi(200.0, 1.0, Pulse::pi(), kUnit), 0.0, sc), ConvergenceError);
}
