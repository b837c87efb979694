#pragma once

// Fuel comparison between two logs of the same scenario, and the eco-score.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcsim/harness/csv.hpp"
#include "vcsim/powertrain.hpp"

namespace vcsim::harness {

struct ThrottleStats {
  double mean_pct = 0.0;
  double max_pct = 0.0;
  double wide_open_share = 0.0;  // share of ticks at >= 99 %
  std::optional<double> top_speed_mean_pct;
};

struct LogFigures {
  std::string mode;
  double distance_m = 0.0;
  double fuel_ml = 0.0;
  std::optional<double> consumption_l_per_100km;
  std::optional<double> top_speed_kmh;
  std::optional<double> top_speed_injection_mlps;
  ThrottleStats throttle;
};

struct SavingsReport {
  std::string scenario;
  LogFigures a;
  LogFigures b;
  std::optional<double> saving_pct;                // fuel per distance, b relative to a
  std::optional<double> co2_delta_g_per_100km;     // a minus b
  std::optional<double> injection_reduction_pct;   // top-speed cruise, b relative to a
};

inline constexpr double kTopSpeedBandKmh = 0.5;
inline constexpr double kLevelGrade = 1e-9;

/// Level-road samples within the band below the highest level-road speed.
inline std::vector<const MeasurementRecord*> top_speed_samples(const std::vector<MeasurementRecord>& recs) {
  double top = -1.0;
  for (const auto& r : recs)
    if (std::abs(r.grade) <= kLevelGrade) top = std::max(top, r.v_true_kmh);
  std::vector<const MeasurementRecord*> out;
  if (top <= 0.0) return out;
  for (const auto& r : recs)
    if (std::abs(r.grade) <= kLevelGrade && r.v_true_kmh >= top - kTopSpeedBandKmh) out.push_back(&r);
  return out;
}

inline LogFigures figures(const Log& log) {
  LogFigures f;
  f.mode = log.meta.mode;
  if (log.records.empty()) return f;
  const auto& last = log.records.back();
  f.distance_m = last.x_m;
  f.fuel_ml = last.fuel_ml;
  if (f.distance_m > 0.0) f.consumption_l_per_100km = powertrain::consumption(f.fuel_ml, f.distance_m);

  double sum = 0.0;
  std::size_t wot = 0;
  for (const auto& r : log.records) {
    sum += r.tva_actual_pct;
    f.throttle.max_pct = std::max(f.throttle.max_pct, r.tva_actual_pct);
    if (r.tva_actual_pct >= 99.0) ++wot;
  }
  const auto n = static_cast<double>(log.records.size());
  f.throttle.mean_pct = sum / n;
  f.throttle.wide_open_share = static_cast<double>(wot) / n;

  const auto top = top_speed_samples(log.records);
  if (!top.empty()) {
    double inj = 0.0, thr = 0.0, v = 0.0;
    for (const auto* r : top) {
      inj += r->injection_mlps;
      thr += r->tva_actual_pct;
      v += r->v_true_kmh;
    }
    const auto m = static_cast<double>(top.size());
    f.top_speed_kmh = v / m;
    f.top_speed_injection_mlps = inj / m;
    f.throttle.top_speed_mean_pct = thr / m;
  }
  return f;
}

/// Throws SCENARIO_MISMATCH unless both logs come from the same scenario.
inline SavingsReport compare(const Log& a, const Log& b) {
  if (a.meta.scenario.empty() || a.meta.scenario != b.meta.scenario)
    throw Error("SCENARIO_MISMATCH",
                "logs come from different scenarios ('" + a.meta.scenario + "' vs '" + b.meta.scenario + "')");
  SavingsReport rep;
  rep.scenario = a.meta.scenario;
  rep.a = figures(a);
  rep.b = figures(b);
  if (rep.a.consumption_l_per_100km && rep.b.consumption_l_per_100km && *rep.a.consumption_l_per_100km > 0.0) {
    const double ca = *rep.a.consumption_l_per_100km;
    const double cb = *rep.b.consumption_l_per_100km;
    rep.saving_pct = 100.0 * (ca - cb) / ca;
    rep.co2_delta_g_per_100km = powertrain::co2_equivalent(ca - cb);
  }
  if (rep.a.top_speed_injection_mlps && rep.b.top_speed_injection_mlps && *rep.a.top_speed_injection_mlps > 0.0)
    rep.injection_reduction_pct =
        100.0 * (1.0 - *rep.b.top_speed_injection_mlps / *rep.a.top_speed_injection_mlps);
  return rep;
}

inline nlohmann::json to_json(const LogFigures& f) {
  nlohmann::json j;
  j["mode"] = f.mode;
  j["distance_m"] = f.distance_m;
  j["fuel_ml"] = f.fuel_ml;
  j["consumption_l_per_100km"] = f.consumption_l_per_100km ? nlohmann::json(*f.consumption_l_per_100km) : nullptr;
  j["top_speed_kmh"] = f.top_speed_kmh ? nlohmann::json(*f.top_speed_kmh) : nullptr;
  j["top_speed_injection_mlps"] = f.top_speed_injection_mlps ? nlohmann::json(*f.top_speed_injection_mlps) : nullptr;
  j["throttle"] = {{"mean_pct", f.throttle.mean_pct},
                   {"max_pct", f.throttle.max_pct},
                   {"wide_open_share", f.throttle.wide_open_share},
                   {"top_speed_mean_pct", f.throttle.top_speed_mean_pct
                                              ? nlohmann::json(*f.throttle.top_speed_mean_pct)
                                              : nullptr}};
  return j;
}

inline nlohmann::json to_json(const SavingsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"scenario", r.scenario},
          {"a", to_json(r.a)},
          {"b", to_json(r.b)},
          {"saving_pct", opt(r.saving_pct)},
          {"co2_delta_g_per_100km", opt(r.co2_delta_g_per_100km)},
          {"injection_reduction_pct", opt(r.injection_reduction_pct)},
          {"reference_saving_pct", 13.6}};
}

inline nlohmann::json to_json(const RunSummary& s) {
  auto finite = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"scenario", s.scenario},
          {"mode", to_string(s.mode)},
          {"duration_s", s.duration_s},
          {"distance_m", s.distance_m},
          {"urban_m", s.urban_m},
          {"rural_m", s.rural_m},
          {"fuel_ml", s.fuel_ml},
          {"urban_fuel_ml", s.urban_fuel_ml},
          {"rural_fuel_ml", s.rural_fuel_ml},
          {"consumption_l_per_100km", finite(s.consumption_l_per_100km)},
          {"max_speed_kmh", s.max_speed_kmh},
          {"energy_rel_error", s.energy_rel_error},
          {"route_completed", s.route_completed}};
}

/// Fuel saved against the calibrated ORIGINAL consumption over the same
/// distance, as a 0-100 score.
inline double eco_score(double fuel_ml, double distance_m, double baseline_l_per_100km) {
  if (!(distance_m > 0.0) || !(baseline_l_per_100km > 0.0)) return 0.0;
  const double baseline_ml = baseline_l_per_100km * distance_m / 100.0;
  return clamp(100.0 * (baseline_ml - fuel_ml) / baseline_ml, 0.0, 100.0);
}

inline double eco_score(const std::vector<MeasurementRecord>& recs, double baseline_l_per_100km) {
  if (recs.empty()) return 0.0;
  return eco_score(recs.back().fuel_ml, recs.back().x_m, baseline_l_per_100km);
}

}  // namespace vcsim::harness
