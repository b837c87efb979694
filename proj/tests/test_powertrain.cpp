#include <gtest/gtest.h>

#include "support.hpp"
#include "vcsim/powertrain.hpp"

using namespace vcsim;
using namespace vcsim::powertrain;
using vcsim::testing::for_all;
using vcsim::testing::Gen;

namespace {

// Reference values from tests/oracle/derive.py.
constexpr double kRetardCoeff = 0.000566893424;
constexpr double kThrottleForEta075 = 0.6175095871;

/// Time for the actuator to come within 1 % of `to` after a step from `from`.
double settle_time(double from, double to, const PowertrainParams& p = {}) {
  double pos = from;
  double t = 0.0;
  while (std::abs(pos - to) > 0.01 && t < 1.0) {
    pos = tva_track(pos, to, 0.001, p);
    t += 0.001;
  }
  return t;
}

}  // namespace

TEST(Tva, HoldsPositionAtCommand) { EXPECT_EQ(tva_track(0.37, 0.37, 0.001, {}), 0.37); }

TEST(Tva, FullStepSettlesWithin60ms) { EXPECT_LE(settle_time(0.0, 1.0), 0.060 + 1e-12); }

TEST(Tva, ClosingStepMirrorsOpening) { EXPECT_NEAR(settle_time(1.0, 0.0), settle_time(0.0, 1.0), 1e-12); }

TEST(Tva, AnyStepSettlesWithin60ms) {
  for_all(300, 21, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    EXPECT_LE(settle_time(g.uniform(0.0, 1.0), g.uniform(0.0, 1.0)), 0.060 + 1e-12);
  });
}

TEST(ThrottleMap, EndpointsAndIdle) {
  const PowertrainParams p;
  const auto curve = dynamics::default_power_curve();
  EXPECT_DOUBLE_EQ(indicated_power(1.0, 10.0, curve, p), curve(10.0));
  EXPECT_DOUBLE_EQ(indicated_power(0.0, 10.0, curve, p), p.idle_throttle_fraction * curve(10.0));
}

TEST(ThrottleMap, MonotoneInThrottle) {
  const auto curve = dynamics::default_power_curve();
  for_all(500, 22, [&](Gen& g, int i) {
    SCOPED_TRACE(i);
    double a = g.uniform(0.0, 1.0), b = g.uniform(0.0, 1.0);
    if (a > b) std::swap(a, b);
    const double v = g.uniform(0.0, 15.0);
    EXPECT_LE(indicated_power(a, v, curve, {}), indicated_power(b, v, curve, {}));
  });
}

TEST(ThrottleMap, InverseRecoversThrottle) {
  for_all(300, 23, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double u = g.uniform(0.0, 1.0);
    EXPECT_NEAR(throttle_for_power_fraction(throttle_power_fraction(u, {}), {}), u, 1e-9);
  });
}

TEST(IgnitionEfficiency, OptimumIsUnity) { EXPECT_EQ(ignition_efficiency(5.0, {}), 1.0); }

TEST(IgnitionEfficiency, RestrictedAngleGivesThreeQuarters) {
  PowertrainParams p;
  EXPECT_NEAR(p.retard_efficiency_coeff, kRetardCoeff, 1e-12);
  EXPECT_NEAR(ignition_efficiency(-16.0, p), 0.75, 1e-12);
  EXPECT_NEAR(calibrate_retard_coeff(0.75, p), kRetardCoeff, 1e-12);
}

TEST(IgnitionEfficiency, SymmetricAboutOptimumAndBelowUnity) {
  for_all(300, 24, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double d = g.uniform(1e-3, 40.0);
    EXPECT_DOUBLE_EQ(ignition_efficiency(5.0 + d, {}), ignition_efficiency(5.0 - d, {}));
    EXPECT_LT(ignition_efficiency(5.0 + d, {}), 1.0);
  });
}

TEST(IgnitionEfficiency, FloorHolds) { EXPECT_EQ(ignition_efficiency(-45.0, {}), 0.4); }

TEST(EcRestriction, Examples) {
  const PowertrainParams p;
  EXPECT_EQ(ec_original_restriction(30.0, p), 5.0);
  EXPECT_EQ(ec_original_restriction(48.7, p), -16.0);
  EXPECT_EQ(ec_original_restriction(60.0, p), -16.0);
}

TEST(EcRestriction, MonotoneAndContinuous) {
  const PowertrainParams p;
  double prev = ec_original_restriction(0.0, p);
  for (double v = 0.001; v <= 60.0; v += 0.001) {
    const double a = ec_original_restriction(v, p);
    EXPECT_LE(a, prev);
    EXPECT_LT(prev - a, 0.03);
    prev = a;
  }
}

TEST(BrakePower, ComposesEfficiencyAndIndicatedPower) {
  const PowertrainParams p;
  const auto curve = dynamics::default_power_curve();
  EXPECT_DOUBLE_EQ(brake_power(5.0, 1.0, 10.0, curve, p), curve(10.0));
  EXPECT_NEAR(brake_power(-16.0, 0.6, 10.0, curve, p), 0.75 * brake_power(5.0, 0.6, 10.0, curve, p), 1e-9);
}

TEST(BrakePower, EqualBrakePowerAtRestrictedTopSpeed) {
  // ORIGINAL at 48.7 km/h: wide open, spark fully retarded. VC delivers the
  // same brake power at optimum spark with a partly open throttle.
  const PowertrainParams p;
  const auto curve = dynamics::default_power_curve();
  const double v = kmh_to_mps(48.7);
  const double orig_brake = brake_power(-16.0, 1.0, v, curve, p);
  const double u_vc = throttle_for_power_fraction(0.75, p);
  EXPECT_NEAR(u_vc, kThrottleForEta075, 1e-9);
  EXPECT_NEAR(brake_power(5.0, u_vc, v, curve, p), orig_brake, 1e-9);
  EXPECT_NEAR(indicated_power(u_vc, v, curve, p) / indicated_power(1.0, v, curve, p), 0.75, 1e-12);
}

TEST(Injection, ProportionalAboveIdleFloor) {
  const PowertrainParams p;
  EXPECT_NEAR(injection_rate(2000.0, p), 2.0 * injection_rate(1000.0, p), 1e-12);
  EXPECT_EQ(injection_rate(0.0, p), p.idle_fuel_rate_mlps);
}

TEST(Injection, VcNeverAboveOriginalAtEqualBrakePower) {
  const PowertrainParams p;
  const auto curve = dynamics::default_power_curve();
  for_all(500, 25, [&](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double v = kmh_to_mps(g.uniform(5.0, 55.0));
    const double angle = ec_original_restriction(mps_to_kmh(v), p);
    const double u_orig = g.uniform(0.0, 1.0);
    const double brake = brake_power(angle, u_orig, v, curve, p);
    const double u_vc = throttle_for_power_fraction(brake / curve(v), p);
    const double inj_orig = injection_rate(indicated_power(u_orig, v, curve, p), p);
    const double inj_vc = injection_rate(indicated_power(u_vc, v, curve, p), p);
    EXPECT_LE(inj_vc, inj_orig + 1e-12);
    if (angle == p.optimal_ignition_deg) {
      EXPECT_NEAR(inj_vc, inj_orig, 1e-9);
    }
  });
}

TEST(Consumption, TableExamples) {
  EXPECT_NEAR(consumption(1060.0, 50400.0), 2.10, 0.005);
  EXPECT_NEAR(consumption(925.0, 50400.0), 1.83, 0.01);
  EXPECT_EQ(consumption(0.0, 1000.0), 0.0);
}

TEST(Consumption, RejectsNonPositiveDistance) {
  EXPECT_THROW(consumption(10.0, 0.0), Error);
  EXPECT_THROW(consumption(10.0, -5.0), Error);
}

TEST(Co2, Examples) {
  EXPECT_EQ(co2_equivalent(1.0), 2280.0);
  EXPECT_EQ(co2_equivalent(0.0), 0.0);
  EXPECT_NEAR(co2_equivalent(0.29), 661.0, 0.5);
}

TEST(Clutch, FullyEngagedFrom15) {
  EXPECT_EQ(clutch_factor(15.0, {}), 1.0);
  EXPECT_EQ(clutch_factor(40.0, {}), 1.0);
  EXPECT_GT(clutch_factor(0.0, {}), 0.0);
}

TEST(Clutch, MonotoneInSpeed) {
  double prev = clutch_factor(0.0, {});
  for (double v = 0.01; v < 20.0; v += 0.01) {
    EXPECT_GE(clutch_factor(v, {}), prev);
    prev = clutch_factor(v, {});
  }
}

TEST(Powertrain, FuelTotalIsTrapezoidOfRate) {
  for_all(20, 26, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    Powertrain pt(dynamics::default_power_curve(), {});
    double integral = 0.0;
    double prev_rate = pt.state().fuel_rate_mlps;
    double prev_total = 0.0;
    double v = g.uniform(0.0, 13.0);
    for (int k = 0; k < 20000; ++k) {
      const double cmd = k % 700 < 350 ? g.uniform(0.0, 1.0) : 0.0;
      pt.step(cmd, k % 3 ? 5.0 : -16.0, v, 0.001);
      integral += 0.5 * (prev_rate + pt.state().fuel_rate_mlps) * 0.001;
      prev_rate = pt.state().fuel_rate_mlps;
      ASSERT_GE(pt.state().fuel_total_ml, prev_total);
      ASSERT_GE(pt.state().fuel_rate_mlps, pt.params().idle_fuel_rate_mlps);
      prev_total = pt.state().fuel_total_ml;
      v = std::max(0.0, v + g.uniform(-0.01, 0.01));
    }
    EXPECT_NEAR(pt.state().fuel_total_ml, integral, 1e-3 * integral);
  });
}

TEST(Powertrain, ShutDownStopsFuelAndPower) {
  Powertrain pt(dynamics::default_power_curve(), {});
  pt.shut_down();
  const double f = pt.step(1.0, 5.0, 10.0, 0.001);
  EXPECT_EQ(f, 0.0);
  EXPECT_EQ(pt.state().fuel_rate_mlps, 0.0);
  pt.restart();
  EXPECT_GT(pt.step(1.0, 5.0, 10.0, 0.001), 0.0);
}

TEST(PowertrainParams, ValidateRejectsOutOfRange) {
  PowertrainParams p;
  EXPECT_NO_THROW(p.validate());
  p.base_indicated_efficiency = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.idle_throttle_fraction = 1.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(EngineRpm, DisplayMapRange) {
  const PowertrainParams p;
  EXPECT_EQ(engine_rpm(0.0, true, p), p.rpm_idle);
  EXPECT_EQ(engine_rpm(30.0, false, p), 0.0);
  EXPECT_LE(engine_rpm(80.0, true, p), p.rpm_max);
}
