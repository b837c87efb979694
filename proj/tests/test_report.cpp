#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "vcsim/harness/calibrate.hpp"
#include "vcsim/harness/report.hpp"

using namespace vcsim;
using namespace vcsim::harness;
using vcsim::testing::for_all;
using vcsim::testing::Gen;

namespace {

Log log_of(const ScenarioConfig& c, Mode m) { return {{c.name, to_string(m), c.dt_s, c.control_period_s}, run(c, m).records}; }

}  // namespace

TEST(Compare, IdenticalLogsSaveNothing) {
  const auto l = log_of(scenario_s1(), Mode::Original);
  const auto r = compare(l, l);
  ASSERT_TRUE(r.saving_pct);
  EXPECT_EQ(*r.saving_pct, 0.0);
  EXPECT_EQ(*r.co2_delta_g_per_100km, 0.0);
  EXPECT_EQ(*r.injection_reduction_pct, 0.0);
}

TEST(Compare, Co2FollowsConsumptionDelta) {
  const auto c = fuel_cycle(0.02, 2);
  const auto r = compare(log_of(c, Mode::Original), log_of(c, Mode::VelocityControl));
  ASSERT_TRUE(r.saving_pct && r.a.consumption_l_per_100km && r.b.consumption_l_per_100km);
  const double delta = *r.a.consumption_l_per_100km - *r.b.consumption_l_per_100km;
  EXPECT_GT(delta, 0.0);
  EXPECT_DOUBLE_EQ(*r.co2_delta_g_per_100km, 2280.0 * delta);
  EXPECT_DOUBLE_EQ(*r.saving_pct, 100.0 * delta / *r.a.consumption_l_per_100km);
}

TEST(Compare, ScenarioMismatch) {
  const auto a = log_of(scenario_s1(), Mode::Original);
  auto b = a;
  b.meta.scenario = "S2";
  try {
    compare(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "SCENARIO_MISMATCH");
  }
}

TEST(Compare, EmptyLogsHaveNoFigures) {
  const Log a{{"X", "ORIGINAL"}, {}};
  const auto r = compare(a, a);
  EXPECT_FALSE(r.saving_pct);
  EXPECT_FALSE(r.injection_reduction_pct);
  const auto j = to_json(r);
  EXPECT_TRUE(j.at("saving_pct").is_null());
  EXPECT_TRUE(j.at("a").at("top_speed_kmh").is_null());
}

TEST(Compare, TopSpeedInjectionReductionOnS1) {
  const auto s1 = scenario_s1();
  const auto r = compare(log_of(s1, Mode::Original), log_of(s1, Mode::VelocityControl));
  ASSERT_TRUE(r.injection_reduction_pct);
  EXPECT_GT(*r.injection_reduction_pct, 20.0);
  EXPECT_LT(*r.injection_reduction_pct, 30.0);
  EXPECT_GT(*r.a.top_speed_kmh, 47.5);
  EXPECT_NEAR(*r.b.top_speed_kmh, 44.8, 0.3);
}

TEST(TopSpeed, OnlyLevelRoadSamples) {
  const auto l = log_of(scenario_s3(), Mode::Original);
  for (const auto* r : top_speed_samples(l.records)) EXPECT_EQ(r->grade, 0.0);
}

TEST(EcoScore, Examples) {
  EXPECT_EQ(eco_score(0.0, 1000.0, 2.0), 100.0);
  EXPECT_EQ(eco_score(20.0, 1000.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(eco_score(15.0, 1000.0, 2.0), 25.0);
  EXPECT_EQ(eco_score(30.0, 1000.0, 2.0), 0.0);
  EXPECT_EQ(eco_score(1.0, 0.0, 2.0), 0.0);
}

TEST(EcoScore, BoundedAndMonotone) {
  for_all(1000, 61, [](Gen& g, int i) {
    SCOPED_TRACE(i);
    const double d = g.uniform(1.0, 1e5), base = g.uniform(0.5, 5.0);
    const double f1 = g.uniform(0.0, 2e3), f2 = f1 + g.uniform(0.0, 100.0);
    const double s1 = eco_score(f1, d, base), s2 = eco_score(f2, d, base);
    EXPECT_GE(s1, 0.0);
    EXPECT_LE(s1, 100.0);
    EXPECT_GE(s1, s2);
  });
}

TEST(EcoScore, VelocityControlScoresOnTheCycle) {
  const auto c = fuel_cycle(0.1, 1);
  const double base = c.params.eco_baseline_l_per_100km;
  EXPECT_LT(eco_score(run(c, Mode::Original).records, base), 1.0);
  EXPECT_GT(eco_score(run(c, Mode::VelocityControl).records, base), 5.0);
}

TEST(Summary, JsonFields) {
  auto c = scenario_s1();
  c.duration_s = 0.0;
  const auto j = to_json(run(c, Mode::VelocityControl).summary);
  EXPECT_EQ(j.at("scenario"), "S1");
  EXPECT_EQ(j.at("mode"), "VC");
  EXPECT_TRUE(j.at("consumption_l_per_100km").is_null());
  EXPECT_EQ(j.at("distance_m"), 0.0);
}

TEST(Calibration, ReproducesTheShippedConstants) {
  const auto rep = calibrate();
  const powertrain::PowertrainParams shipped;
  EXPECT_NEAR(rep.retard_efficiency_coeff, 0.000566893424, 1e-12);
  EXPECT_NEAR(rep.base_indicated_efficiency / shipped.base_indicated_efficiency, 1.0, 1e-6);
  EXPECT_NEAR(rep.original_l_per_100km, 2.11, 2.11 * 0.01);
  EXPECT_GT(rep.saving_pct, 10.0);
  EXPECT_LT(rep.saving_pct, 18.0);
  EXPECT_NEAR(rep.top_speed_injection_reduction_pct, 25.0, 5.0);
}

TEST(Calibration, HitsTargetFromOffsetStart) {
  ScenarioParams p;
  p.powertrain.base_indicated_efficiency = 0.2;
  CalibrationTargets t;
  t.fuel_scale = 0.02;
  t.original_l_per_100km = 2.5;
  const auto rep = calibrate(p, t);
  EXPECT_NEAR(rep.original_l_per_100km, 2.5, 2.5 * 1e-6);
  EXPECT_LT(rep.iterations, t.max_iterations);
}
