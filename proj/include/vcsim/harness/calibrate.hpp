#pragma once

// Fits the two fuel-model constants: the retard coefficient from the efficiency
// at the restricted ignition angle, and the base indicated efficiency from the
// ORIGINAL-mode consumption on the reference cycle.

#include <cmath>
#include <cstdint>

#include "json.hpp"
#include "vcsim/harness/report.hpp"
#include "vcsim/harness/scenario.hpp"
#include "vcsim/harness/simulator.hpp"

namespace vcsim::harness {

struct CalibrationTargets {
  double original_l_per_100km = 2.11;
  double restricted_efficiency = 0.75;
  double fuel_scale = 0.1;
  std::uint64_t seed = 1;
  double rel_tolerance = 1e-10;
  int max_iterations = 50;
};

struct CalibrationReport {
  CalibrationTargets targets;
  double retard_efficiency_coeff = 0.0;
  double base_indicated_efficiency = 0.0;
  int iterations = 0;
  double original_l_per_100km = 0.0;
  double vc_l_per_100km = 0.0;
  double saving_pct = 0.0;
  double top_speed_injection_reduction_pct = 0.0;
};

/// Fixed-point iteration eta <- eta * c(eta) / target. Consumption scales as
/// 1/eta except where the idle floor binds, so this converges in a few runs.
inline CalibrationReport calibrate(const ScenarioParams& base = {}, const CalibrationTargets& tgt = {}) {
  CalibrationReport rep;
  rep.targets = tgt;
  ScenarioConfig cycle = fuel_cycle(tgt.fuel_scale, tgt.seed);
  cycle.params = base;
  auto& pp = cycle.params.powertrain;
  pp.retard_efficiency_coeff = powertrain::calibrate_retard_coeff(tgt.restricted_efficiency, pp);
  rep.retard_efficiency_coeff = pp.retard_efficiency_coeff;

  double cons = 0.0;
  for (rep.iterations = 1; rep.iterations <= tgt.max_iterations; ++rep.iterations) {
    cons = run(cycle, Mode::Original).summary.consumption_l_per_100km;
    if (std::abs(cons / tgt.original_l_per_100km - 1.0) < tgt.rel_tolerance) break;
    pp.base_indicated_efficiency = clamp(pp.base_indicated_efficiency * cons / tgt.original_l_per_100km, 1e-4, 1.0);
  }
  rep.iterations = std::min(rep.iterations, tgt.max_iterations);
  rep.base_indicated_efficiency = pp.base_indicated_efficiency;
  rep.original_l_per_100km = cons;
  rep.vc_l_per_100km = run(cycle, Mode::VelocityControl).summary.consumption_l_per_100km;
  rep.saving_pct = 100.0 * (1.0 - rep.vc_l_per_100km / rep.original_l_per_100km);

  ScenarioConfig s1 = scenario_s1();
  s1.params = cycle.params;
  auto as_log = [&](Mode m) { return Log{{s1.name, to_string(m), s1.dt_s, s1.control_period_s}, run(s1, m).records}; };
  const auto cmp = compare(as_log(Mode::Original), as_log(Mode::VelocityControl));
  rep.top_speed_injection_reduction_pct = cmp.injection_reduction_pct.value_or(0.0);
  return rep;
}

inline nlohmann::json to_json(const CalibrationReport& r) {
  return {{"targets",
           {{"original_l_per_100km", r.targets.original_l_per_100km},
            {"restricted_efficiency", r.targets.restricted_efficiency},
            {"fuel_scale", r.targets.fuel_scale},
            {"seed", r.targets.seed}}},
          {"retard_efficiency_coeff", r.retard_efficiency_coeff},
          {"base_indicated_efficiency", r.base_indicated_efficiency},
          {"iterations", r.iterations},
          {"original_l_per_100km", r.original_l_per_100km},
          {"vc_l_per_100km", r.vc_l_per_100km},
          {"saving_pct", r.saving_pct},
          {"top_speed_injection_reduction_pct", r.top_speed_injection_reduction_pct}};
}

}  // namespace vcsim::harness
