#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "support.hpp"
#include "vcsim/harness/csv.hpp"

// Reference trajectories for the built-in scenarios. Set VCSIM_UPDATE_GOLDEN=1
// to rewrite them after an intended model change.

using namespace vcsim;
using namespace vcsim::harness;

namespace {

constexpr std::size_t kStride = 5;
constexpr double kTol = 1e-9;

std::vector<MeasurementRecord> thinned(const std::vector<MeasurementRecord>& recs) {
  std::vector<MeasurementRecord> out;
  for (std::size_t i = 0; i < recs.size(); i += kStride) out.push_back(recs[i]);
  return out;
}

void expect_close(double got, double want, const char* what, double t) {
  EXPECT_LE(std::abs(got - want), kTol * std::max(1.0, std::abs(want))) << what << " at t=" << t;
}

class Golden : public ::testing::TestWithParam<std::tuple<std::string, Mode>> {};

}  // namespace

TEST_P(Golden, MatchesReference) {
  const auto& [name, mode] = GetParam();
  const auto cfg = builtin_scenario(name);
  const auto recs = thinned(run(cfg, mode).records);
  const auto path = vcsim::testing::source_path("tests/golden/" + name + "_" + to_string(mode) + ".csv");
  const LogMeta meta{cfg.name, to_string(mode), cfg.dt_s, cfg.control_period_s};

  const char* update = std::getenv("VCSIM_UPDATE_GOLDEN");
  if (update && std::string(update) == "1") {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    write_csv(path, meta, recs, Precision::RoundTrip);
    GTEST_SKIP() << "rewrote " << path;
  }

  const auto want = read_csv(path);
  EXPECT_EQ(want.meta.scenario, meta.scenario);
  EXPECT_EQ(want.meta.mode, meta.mode);
  ASSERT_EQ(want.records.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& g = recs[i];
    const auto& w = want.records[i];
    const double t = w.t_s;
    expect_close(g.t_s, w.t_s, "t", t);
    expect_close(g.grip, w.grip, "grip", t);
    expect_close(g.v_set_kmh, w.v_set_kmh, "v_set", t);
    expect_close(g.v_meas_kmh, w.v_meas_kmh, "v_meas", t);
    expect_close(g.v_true_kmh, w.v_true_kmh, "v_true", t);
    expect_close(g.x_m, w.x_m, "distance", t);
    expect_close(g.tva_cmd_pct, w.tva_cmd_pct, "tva_cmd", t);
    expect_close(g.tva_actual_pct, w.tva_actual_pct, "tva_actual", t);
    expect_close(g.ignition_deg, w.ignition_deg, "ignition", t);
    expect_close(g.engine_rpm, w.engine_rpm, "engine_rpm", t);
    expect_close(g.injection_mlps, w.injection_mlps, "injection_rate", t);
    expect_close(g.fuel_ml, w.fuel_ml, "fuel_total", t);
    expect_close(g.grade, w.grade, "grade", t);
    EXPECT_EQ(g.mode, w.mode);
    EXPECT_EQ(g.failsafe_class, w.failsafe_class);
    EXPECT_EQ(g.cruise, w.cruise);
    if (::testing::Test::HasFailure()) {
      ADD_FAILURE() << "first divergence at record " << i * kStride;
      break;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Builtins, Golden,
                         ::testing::Combine(::testing::Values("S1", "S2", "S3"),
                                            ::testing::Values(Mode::Original, Mode::VelocityControl)),
                         [](const auto& info) {
                           return std::get<0>(info.param) + "_" + to_string(std::get<1>(info.param));
                         });
