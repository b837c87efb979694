#include <gtest/gtest.h>

#include <vector>

#include "support.hpp"
#include "vcsim/dynamics.hpp"

using namespace vcsim;
using namespace vcsim::dynamics;
using vcsim::testing::for_all;
using vcsim::testing::Gen;

namespace {

// Reference values from tests/oracle/derive.py.
constexpr double kRollingN = 26.33985;
constexpr double kAir45N = 47.775;
constexpr double kEquivalentMassKg = 211.300885;
constexpr double kPowerPeakKmh = 21.665;
constexpr double kPowerAt487W = 1305.611576;
constexpr double kResistancePower487W = 1113.257189;
constexpr double kUnrestrictedTopKmh = 51.28204444;
const std::vector<double> kCoefficients{-650.595238095, 1040.63928571, -167.829428571, 11.2066971429,
                                        -0.273270857143};

VehicleState at(double v_mps, double grade = 0.0) {
  VehicleState s;
  s.v_mps = v_mps;
  s.grade = grade;
  return s;
}

/// Integrates a constant wheel power for `seconds` and returns the final state.
VehicleState coast_with_power(double power_W, double v0, double seconds, double grade = 0.0,
                              const VehicleParams& p = {}) {
  VehicleState s = at(v0, grade);
  const int n = static_cast<int>(seconds / 0.001);
  for (int i = 0; i < n; ++i) s = step(s, drive_force(power_W, s.v_mps), p, 0.001);
  return s;
}

}  // namespace

TEST(VehicleParams, DefaultsMatchTheVehicleTable) {
  const VehicleParams p;
  EXPECT_EQ(p.frontal_area_m2, 0.78);
  EXPECT_EQ(p.wheel_radius_m, 0.226);
  EXPECT_EQ(p.inertia_front_Nms2, 0.327);
  EXPECT_EQ(p.inertia_rear_Nms2, 1.3228);
  EXPECT_EQ(p.mass_scooter_kg, 99.0);
  EXPECT_EQ(p.mass_rider_kg, 80.0);
  EXPECT_EQ(p.drag_coeff, 0.64);
  EXPECT_EQ(p.rolling_coeff, 0.015);
  EXPECT_EQ(p.air_density, 1.225);
  EXPECT_EQ(p.gravity, 9.81);
  EXPECT_NO_THROW(p.validate());
}

TEST(VehicleParams, RejectsNonPositiveValues) {
  VehicleParams p;
  p.wheel_radius_m = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(ResistanceForce, RollingOnlyAtRest) { EXPECT_NEAR(resistance_force(at(0.0), {}), kRollingN, 1e-9); }

TEST(ResistanceForce, AirPlusRollingAt45) {
  EXPECT_NEAR(air_force(12.5, {}), kAir45N, 1e-9);
  EXPECT_NEAR(resistance_force(at(12.5), {}), 74.1, 0.02);
}

TEST(ResistanceForce, VanishesWithoutRollingCoefficient) {
  VehicleParams p;
  p.rolling_coeff = 0.0;
  EXPECT_EQ(resistance_force(at(0.0), p), 0.0);
}

TEST(ResistanceForce, GradeTermIsAntisymmetric) {
  for_all(200, 11, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double grade = g.uniform(0.0, 0.3);
    EXPECT_DOUBLE_EQ(grade_force(grade, {}), -grade_force(-grade, {}));
  });
}

TEST(EquivalentMass, DefaultVehicle) { EXPECT_NEAR(equivalent_mass({}), kEquivalentMassKg, 1e-6); }

TEST(EquivalentMass, NoInertiaLeavesTranslationalMass) {
  VehicleParams p;
  p.inertia_front_Nms2 = 0.0;
  p.inertia_rear_Nms2 = 0.0;
  EXPECT_EQ(equivalent_mass(p), 179.0);
}

TEST(EquivalentMass, DoublingRadiusQuartersRotationalShare) {
  VehicleParams p;
  const double rot = equivalent_mass(p) - p.total_mass_kg();
  p.wheel_radius_m *= 2.0;
  EXPECT_NEAR(equivalent_mass(p) - p.total_mass_kg(), rot / 4.0, 1e-12);
}

TEST(DriveForce, DividesPowerBySpeed) {
  EXPECT_EQ(drive_force(1000.0, 10.0), 100.0);
  EXPECT_EQ(drive_force(0.0, 7.0), 0.0);
  EXPECT_EQ(drive_force(0.0, 0.0), 0.0);
}

TEST(DriveForce, LaunchIsRegularized) { EXPECT_EQ(drive_force(100.0, 0.0), 100.0 / kLaunchSpeedEps); }

TEST(DriveForce, BalancesResistanceAt45) {
  // 926 W at 12.5 m/s is the power that holds 45 km/h on level ground.
  const double net = drive_force(926.0, 12.5) - resistance_force(at(12.5), {});
  EXPECT_NEAR(net, 0.0, 0.05);
  const VehicleState n = step(at(12.5), drive_force(926.0, 12.5), {}, 0.001);
  EXPECT_NEAR(n.v_mps, 12.5, 1e-6);
}

TEST(Step, ForceBalanceKeepsVelocity) {
  const VehicleState s = at(9.0, 0.02);
  const VehicleState n = step(s, resistance_force(s, {}), {}, 0.001);
  EXPECT_DOUBLE_EQ(n.v_mps, 9.0);
  EXPECT_DOUBLE_EQ(n.x_m, 0.009);
}

TEST(Step, StandstillWithoutDriveStaysAtRest) {
  const VehicleState n = step(at(0.0), 0.0, {}, 0.001);
  EXPECT_EQ(n.v_mps, 0.0);
  EXPECT_EQ(n.x_m, 0.0);
  EXPECT_GT(n.t_s, 0.0);
}

TEST(Step, VelocityNeverNegative) {
  for_all(300, 12, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    VehicleState s = at(g.uniform(0.0, 2.0), g.uniform(0.0, 0.3));
    for (int k = 0; k < 2000; ++k) {
      s = step(s, g.uniform(-500.0, 0.0), {}, 0.001);
      ASSERT_GE(s.v_mps, 0.0);
    }
  });
}

TEST(Step, TimeIsNonDecreasing) {
  VehicleState s = at(3.0);
  for (int k = 0; k < 100; ++k) {
    const double t0 = s.t_s;
    s = step(s, 50.0, {}, 0.001);
    EXPECT_GT(s.t_s, t0);
  }
}

TEST(Step, FullThrottleLaunchReachesUnrestrictedTopSpeed) {
  const PowerCurve curve = default_power_curve();
  VehicleState s;
  for (int k = 0; k < 200000; ++k) s = step(s, drive_force(curve(s.v_mps), s.v_mps), {}, 0.001);
  const double top_kmh = mps_to_kmh(unrestricted_top_speed_mps(curve, {}));
  EXPECT_NEAR(top_kmh, kUnrestrictedTopKmh, 1e-6);
  EXPECT_NEAR(mps_to_kmh(s.v_mps), top_kmh, 1.0);
}

TEST(Step, IsBitDeterministic) {
  auto trace = [] {
    std::vector<double> v;
    VehicleState s = at(1.0, 0.03);
    for (int k = 0; k < 5000; ++k) {
      s = step(s, 120.0 + 10.0 * std::sin(k * 0.01), {}, 0.001);
      v.push_back(s.v_mps);
      v.push_back(s.x_m);
    }
    return v;
  };
  EXPECT_EQ(trace(), trace());
}

TEST(EnergyLedger, WorkMatchesKineticEnergyChange) {
  for_all(40, 13, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const VehicleParams p;
    const double m_eq = equivalent_mass(p);
    const double power = g.uniform(0.0, 1600.0);
    const double grade = g.uniform(-0.1, 0.1);
    VehicleState s = at(g.uniform(0.0, 15.0), grade);
    const double v0 = s.v_mps;
    EnergyLedger ledger;
    for (int k = 0; k < 20000; ++k) {
      const double drive = drive_force(power, s.v_mps);
      const double net = drive - resistance_force(s, p);
      const double before = s.v_mps;
      s = step(s, drive, p, 0.001);
      ledger.add(net, before, s.v_mps, 0.001);
    }
    EXPECT_LT(ledger.relative_error(m_eq, v0, s.v_mps), 1e-3);
  });
}

TEST(Dynamics, VelocityNonDecreasingBelowSteadyState) {
  for_all(30, 14, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double power = g.uniform(200.0, 1600.0);
    VehicleState s = at(0.0);
    for (int k = 0; k < 60000; ++k) {
      const double prev = s.v_mps;
      s = step(s, drive_force(power, s.v_mps), {}, 0.001);
      ASSERT_GE(s.v_mps, prev);
    }
  });
}

TEST(Dynamics, TerminalVelocityBalancesPower) {
  for_all(20, 15, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double power = g.uniform(300.0, 1600.0);
    const VehicleState s = coast_with_power(power, 5.0, 400.0);
    EXPECT_LT(std::abs(power - resistance_force(s, {}) * s.v_mps), 1.0);
  });
}

TEST(PowerCurve, ConstantAnchorsGiveConstantCurve) {
  const std::vector<PowerAnchor> a{{5, 1000}, {15, 1000}, {30, 1000}, {50, 1000}};
  const PowerCurve c = fit_power_curve(a);
  for (double v = 1.0; v < 14.0; v += 0.5) EXPECT_NEAR(c(v), 1000.0, 1e-6);
}

TEST(PowerCurve, DefaultCoefficientsMatchReference) {
  const PowerCurve c = default_power_curve();
  ASSERT_EQ(c.coefficients().size(), kCoefficients.size());
  for (std::size_t k = 0; k < kCoefficients.size(); ++k)
    EXPECT_NEAR(c.coefficients()[k], kCoefficients[k], 1e-8 * std::abs(kCoefficients[k]) + 1e-9) << k;
}

TEST(PowerCurve, DefaultHasSingleInteriorMaximum) {
  const PowerCurve c = default_power_curve();
  double best_v = 0.0;
  double best_p = -1.0;
  int sign_changes = 0;
  double prev_slope = c.slope(c.v_min_mps());
  for (double v = c.v_min_mps(); v <= c.v_max_mps(); v += 1e-4) {
    if (c(v) > best_p) {
      best_p = c(v);
      best_v = v;
    }
    const double s = c.slope(v);
    if ((s > 0.0) != (prev_slope > 0.0)) ++sign_changes;
    prev_slope = s;
  }
  EXPECT_EQ(sign_changes, 1);
  EXPECT_GT(mps_to_kmh(best_v), 15.0);
  EXPECT_LT(mps_to_kmh(best_v), 25.0);
  EXPECT_NEAR(mps_to_kmh(best_v), kPowerPeakKmh, 0.01);
}

TEST(PowerCurve, RestrictedTopSpeedIsReachable) {
  const PowerCurve c = default_power_curve();
  const double v = kmh_to_mps(48.7);
  EXPECT_NEAR(resistance_force(at(v), {}) * v, kResistancePower487W, 1e-3);
  EXPECT_NEAR(c(v), kPowerAt487W, 1e-3);
  EXPECT_GE(c(13.53), 1113.0);
}

TEST(PowerCurve, NonNegativeEverywhere) {
  const PowerCurve c = default_power_curve();
  for (double v = 0.0; v < 40.0; v += 0.01) EXPECT_GE(c(v), 0.0);
}

TEST(PowerCurve, HeldBelowAndExtendedAboveAnchors) {
  const PowerCurve c = default_power_curve();
  EXPECT_DOUBLE_EQ(c(0.0), c.polynomial(c.v_min_mps()));
  const double hi = c.v_max_mps();
  EXPECT_NEAR(c(hi + 1.0), c.polynomial(hi) + c.slope(hi), 1e-9);
}

TEST(PowerCurve, RejectsBadAnchorSets) {
  const std::vector<PowerAnchor> few{{5, 500}, {15, 1500}, {25, 1600}};
  EXPECT_THROW(fit_power_curve(few), Error);
  const std::vector<PowerAnchor> unordered{{5, 500}, {25, 1500}, {15, 1600}, {40, 1400}};
  EXPECT_THROW(fit_power_curve(unordered), Error);
  const std::vector<PowerAnchor> negative{{5, 500}, {15, -3000}, {25, 1600}, {40, 1400}, {55, 1150}};
  try {
    fit_power_curve(negative);
    FAIL() << "negative fit accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "CONFIG_INVALID");
  }
}
