#pragma once

// Scenario description: rider script, grade profile, optional route, and the
// parameter set for every subsystem. Loadable from JSON.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vcsim/common.hpp"
#include "vcsim/control.hpp"
#include "vcsim/dynamics.hpp"
#include "vcsim/mecu.hpp"
#include "vcsim/powertrain.hpp"
#include "vcsim/sensing.hpp"

namespace vcsim::harness {

// ---- rider / bench commands -------------------------------------------------

struct GripCmd {
  double value;
};
struct BrakeCmd {
  double value;  // fraction of the rider's maximum brake force
};
struct CruiseCmd {
  control::CruiseCommand command;
};
struct ModeCmd {
  Mode mode;
};
struct RecordCmd {
  bool on;
};
struct FaultCmd {
  mecu::ErrorId id;
  bool active;
};
/// Silences or restores a bus node (drives life detection).
struct NodeSilenceCmd {
  mecu::Node node;
  bool silent;
};
/// Scales one WSS channel (1 = healthy).
struct WssGainCmd {
  int channel;
  double gain;
};
struct OperatorResetCmd {};
struct DisconnectCmd {};

using Command = std::variant<GripCmd, BrakeCmd, CruiseCmd, ModeCmd, RecordCmd, FaultCmd, NodeSilenceCmd, WssGainCmd,
                             OperatorResetCmd, DisconnectCmd>;

inline const char* to_string(control::CruiseCommand c) {
  switch (c) {
    case control::CruiseCommand::Set: return "SET";
    case control::CruiseCommand::Resume: return "RESUME";
    case control::CruiseCommand::Cancel: return "CANCEL";
    case control::CruiseCommand::Increase: return "PLUS";
    case control::CruiseCommand::Decrease: return "MINUS";
  }
  return "?";
}

inline control::CruiseCommand cruise_from_string(const std::string& s) {
  if (s == "SET") return control::CruiseCommand::Set;
  if (s == "RESUME") return control::CruiseCommand::Resume;
  if (s == "CANCEL") return control::CruiseCommand::Cancel;
  if (s == "PLUS" || s == "+1") return control::CruiseCommand::Increase;
  if (s == "MINUS" || s == "-1") return control::CruiseCommand::Decrease;
  throw Error("CONFIG_INVALID", "unknown cruise command '" + s + "'");
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "ORIGINAL" || s == "original") return Mode::Original;
  if (s == "VC" || s == "vc") return Mode::VelocityControl;
  throw Error("CONFIG_INVALID", "unknown mode '" + s + "'");
}

inline mecu::Node node_from_string(const std::string& s) {
  if (s == "TPS") return mecu::Node::Tps;
  if (s == "TVA") return mecu::Node::Tva;
  if (s == "HMI") return mecu::Node::Hmi;
  throw Error("CONFIG_INVALID", "unknown node '" + s + "'");
}

struct ScriptEvent {
  double t_s;
  Command command;
};

// ---- profiles ----------------------------------------------------------------

struct GradePoint {
  double at;
  double grade;
};

/// Piecewise-linear grade over time or travelled distance.
struct GradeProfile {
  enum class Key { Time, Position };
  Key key = Key::Time;
  std::vector<GradePoint> points;

  double at(double t_s, double x_m) const {
    if (points.empty()) return 0.0;
    const double k = key == Key::Time ? t_s : x_m;
    if (k <= points.front().at) return points.front().grade;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (k < points[i].at) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        const double span = b.at - a.at;
        return span > 0.0 ? a.grade + (b.grade - a.grade) * (k - a.at) / span : b.grade;
      }
    }
    return points.back().grade;
  }
};

enum class LegKind { Urban, Rural };

struct RouteLeg {
  double length_m;
  double speed_kmh;  // rider's wish; >= controller v_max means "wide open"
  double grade = 0.0;
  double stop_s = 0.0;  // > 0: stop at the end of the leg and wait
  LegKind kind = LegKind::Urban;
};

struct RiderParams {
  // Human throttle model used when the grip drives the valve directly.
  double kp_per_kmh = 0.08;
  double ki_per_kmh_s = 0.03;
  double full_open_grip = 0.99;
  double brake_decel_mps2 = 2.0;
  double dead_man_decay_s = 1.0;
};

struct ScenarioParams {
  dynamics::VehicleParams vehicle;
  std::vector<dynamics::PowerAnchor> power_anchors = dynamics::default_power_anchors();
  powertrain::PowertrainParams powertrain;
  control::ControllerParams controller = control::ControllerParams::road();
  control::CruiseParams cruise;
  sensing::EncoderConfig encoder;
  sensing::EmulationConfig emulation;
  sensing::SensingParams sensing;
  RiderParams rider;
  double heartbeat_timeout_s = 0.200;
  double eco_baseline_l_per_100km = 2.11;
};

enum class ModeSelection { Original, VelocityControl, Both };

struct ScenarioConfig {
  std::string name = "custom";
  double duration_s = 30.0;
  double dt_s = 0.001;
  double control_period_s = 0.020;
  double preroll_s = 0.0;  // simulated before t=0, not logged
  double initial_speed_kmh = 0.0;
  ModeSelection mode = ModeSelection::Both;
  std::vector<ScriptEvent> script;
  GradeProfile grade;
  std::vector<RouteLeg> route;
  ScenarioParams params;
  std::uint64_t seed = 1;

  int steps_per_tick() const { return static_cast<int>(std::lround(control_period_s / dt_s)); }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
      throw Error("CONFIG_INVALID", field + ": " + msg);
    };
    if (!(dt_s > 0.0)) fail("dt_s", "must be positive");
    if (!(control_period_s > 0.0)) fail("control_period_s", "must be positive");
    const double ratio = control_period_s / dt_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
      fail("control_period_s", "must be an integer multiple of dt_s");
    if (!(duration_s >= 0.0)) fail("duration_s", "must be non-negative");
    if (preroll_s < 0.0) fail("preroll_s", "must be non-negative");
    if (initial_speed_kmh < 0.0) fail("initial_speed_kmh", "must be non-negative");
    for (std::size_t i = 1; i < script.size(); ++i)
      if (script[i].t_s < script[i - 1].t_s) fail("script[" + std::to_string(i) + "].t", "must be non-decreasing");
    for (std::size_t i = 1; i < grade.points.size(); ++i)
      if (grade.points[i].at < grade.points[i - 1].at)
        fail("grade.points[" + std::to_string(i) + "].at", "must be non-decreasing");
    for (std::size_t i = 0; i < route.size(); ++i) {
      if (!(route[i].length_m > 0.0)) fail("route[" + std::to_string(i) + "].length_m", "must be positive");
      if (route[i].speed_kmh < 0.0) fail("route[" + std::to_string(i) + "].speed_kmh", "must be non-negative");
    }
    params.vehicle.validate();
    params.powertrain.validate();
    params.controller.validate();
    (void)dynamics::fit_power_curve(params.power_anchors);
  }
};

// ---- JSON loading ------------------------------------------------------------

namespace detail {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("CONFIG_INVALID", path + "." + key + ": " + e.what());
  }
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) throw Error("CONFIG_INVALID", path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw Error("CONFIG_INVALID", path + "." + it.key() + ": unknown field");
  }
}

inline void apply_params(const json& j, ScenarioParams& p, const std::string& path) {
  check_keys(j, {"vehicle", "powertrain", "controller", "controller_set", "cruise", "encoder", "emulation", "sensing",
                 "rider", "power_anchors", "heartbeat_timeout_s", "eco_baseline_l_per_100km"},
             path);
  if (j.contains("controller_set")) {
    const auto set = j.at("controller_set").get<std::string>();
    if (set == "road")
      p.controller = control::ControllerParams::road();
    else if (set == "sim")
      p.controller = control::ControllerParams::sim();
    else
      throw Error("CONFIG_INVALID", path + ".controller_set: expected 'road' or 'sim'");
  }
  if (j.contains("vehicle")) {
    const auto& v = j.at("vehicle");
    const std::string vp = path + ".vehicle";
    check_keys(v, {"frontal_area_m2", "wheel_radius_m", "inertia_front_Nms2", "inertia_rear_Nms2", "mass_scooter_kg",
                   "mass_rider_kg", "drag_coeff", "rolling_coeff", "air_density", "gravity"},
               vp);
    read(v, "frontal_area_m2", p.vehicle.frontal_area_m2, vp);
    read(v, "wheel_radius_m", p.vehicle.wheel_radius_m, vp);
    read(v, "inertia_front_Nms2", p.vehicle.inertia_front_Nms2, vp);
    read(v, "inertia_rear_Nms2", p.vehicle.inertia_rear_Nms2, vp);
    read(v, "mass_scooter_kg", p.vehicle.mass_scooter_kg, vp);
    read(v, "mass_rider_kg", p.vehicle.mass_rider_kg, vp);
    read(v, "drag_coeff", p.vehicle.drag_coeff, vp);
    read(v, "rolling_coeff", p.vehicle.rolling_coeff, vp);
    read(v, "air_density", p.vehicle.air_density, vp);
    read(v, "gravity", p.vehicle.gravity, vp);
  }
  if (j.contains("power_anchors")) {
    const auto& a = j.at("power_anchors");
    if (!a.is_array()) throw Error("CONFIG_INVALID", path + ".power_anchors: expected [[kmh, W], ...]");
    p.power_anchors.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& e = a[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw Error("CONFIG_INVALID", path + ".power_anchors[" + std::to_string(i) + "]: expected [kmh, W]");
      p.power_anchors.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  }
  if (j.contains("powertrain")) {
    const auto& t = j.at("powertrain");
    const std::string tp = path + ".powertrain";
    auto& q = p.powertrain;
    check_keys(t, {"idle_throttle_fraction", "throttle_exponent", "idle_fuel_rate_mlps", "fuel_energy_density_Jpml",
                   "base_indicated_efficiency", "retard_efficiency_coeff", "efficiency_floor", "optimal_ignition_deg",
                   "restricted_ignition_deg", "restriction_band_kmh", "tva_time_constant_s", "tva_slew_limit_per_s",
                   "clutch_engage_kmh", "clutch_launch_fraction", "v_limit_original_kmh", "rpm_idle", "rpm_max"},
               tp);
    read(t, "idle_throttle_fraction", q.idle_throttle_fraction, tp);
    read(t, "throttle_exponent", q.throttle_exponent, tp);
    read(t, "idle_fuel_rate_mlps", q.idle_fuel_rate_mlps, tp);
    read(t, "fuel_energy_density_Jpml", q.fuel_energy_density_Jpml, tp);
    read(t, "base_indicated_efficiency", q.base_indicated_efficiency, tp);
    read(t, "retard_efficiency_coeff", q.retard_efficiency_coeff, tp);
    read(t, "efficiency_floor", q.efficiency_floor, tp);
    read(t, "optimal_ignition_deg", q.optimal_ignition_deg, tp);
    read(t, "restricted_ignition_deg", q.restricted_ignition_deg, tp);
    read(t, "restriction_band_kmh", q.restriction_band_kmh, tp);
    read(t, "tva_time_constant_s", q.tva_time_constant_s, tp);
    read(t, "tva_slew_limit_per_s", q.tva_slew_limit_per_s, tp);
    read(t, "clutch_engage_kmh", q.clutch_engage_kmh, tp);
    read(t, "clutch_launch_fraction", q.clutch_launch_fraction, tp);
    read(t, "v_limit_original_kmh", q.v_limit_original_kmh, tp);
    read(t, "rpm_idle", q.rpm_idle, tp);
    read(t, "rpm_max", q.rpm_max, tp);
  }
  if (j.contains("controller")) {
    const auto& c = j.at("controller");
    const std::string cp = path + ".controller";
    auto& q = p.controller;
    check_keys(c, {"kp_min", "kp_max", "ki_min", "ki_max", "kt_min", "kt_max", "offset_kmh", "v_max_kmh", "p_limits",
                   "i_limits", "cycle_time_s", "integrator_step"},
               cp);
    read(c, "kp_min", q.kp_min, cp);
    read(c, "kp_max", q.kp_max, cp);
    read(c, "ki_min", q.ki_min, cp);
    read(c, "ki_max", q.ki_max, cp);
    read(c, "kt_min", q.kt_min, cp);
    read(c, "kt_max", q.kt_max, cp);
    read(c, "offset_kmh", q.offset_kmh, cp);
    read(c, "v_max_kmh", q.v_max_kmh, cp);
    read(c, "cycle_time_s", q.cycle_time_s, cp);
    read(c, "integrator_step", q.integrator_step, cp);
    for (const char* key : {"p_limits", "i_limits"}) {
      if (!c.contains(key)) continue;
      const auto& l = c.at(key);
      if (!l.is_array() || l.size() != 2)
        throw Error("CONFIG_INVALID", cp + "." + key + ": expected [lo, hi]");
      control::Limits lim{l[0].get<double>(), l[1].get<double>()};
      (std::string(key) == "p_limits" ? q.p_limits : q.i_limits) = lim;
    }
  }
  if (j.contains("cruise")) {
    const auto& c = j.at("cruise");
    const std::string cp = path + ".cruise";
    check_keys(c, {"min_kmh", "max_kmh", "step_kmh", "override"}, cp);
    read(c, "min_kmh", p.cruise.min_kmh, cp);
    read(c, "max_kmh", p.cruise.max_kmh, cp);
    read(c, "step_kmh", p.cruise.step_kmh, cp);
    if (c.contains("override")) {
      const auto o = c.at("override").get<std::string>();
      if (o == "upward_only")
        p.cruise.override_policy = control::CruiseOverride::UpwardOnly;
      else if (o == "grip_when_open")
        p.cruise.override_policy = control::CruiseOverride::GripWhenOpen;
      else
        throw Error("CONFIG_INVALID", cp + ".override: expected 'upward_only' or 'grip_when_open'");
    }
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    const std::string ep = path + ".encoder";
    check_keys(e, {"wheel_circumference_m", "n_steps", "sample_clock_hz"}, ep);
    read(e, "wheel_circumference_m", p.encoder.wheel_circumference_m, ep);
    read(e, "n_steps", p.encoder.n_steps, ep);
    read(e, "sample_clock_hz", p.encoder.sample_clock_hz, ep);
    if (p.encoder.n_steps < 1 || !(p.encoder.wheel_circumference_m > 0.0) || !(p.encoder.sample_clock_hz > 0.0))
      throw Error("CONFIG_INVALID", ep + ": values must be positive");
  }
  if (j.contains("emulation")) {
    const auto& e = j.at("emulation");
    const std::string ep = path + ".emulation";
    check_keys(e, {"gear_ratio", "pole_count"}, ep);
    read(e, "gear_ratio", p.emulation.gear_ratio, ep);
    read(e, "pole_count", p.emulation.pole_count, ep);
  }
  if (j.contains("sensing")) {
    const auto& s = j.at("sensing");
    const std::string sp = path + ".sensing";
    auto& q = p.sensing;
    check_keys(s, {"staleness_s", "window_gain", "window_min", "window_max", "plausibility_abs_kmh",
                   "plausibility_rel", "plausibility_persist_s", "tss_min_kmh", "tss_hysteresis_kmh", "slip_band_kmh",
                   "slip_persist_s"},
               sp);
    read(s, "staleness_s", q.staleness_s, sp);
    read(s, "window_gain", q.window_gain, sp);
    read(s, "window_min", q.window_min, sp);
    read(s, "window_max", q.window_max, sp);
    read(s, "plausibility_abs_kmh", q.plausibility_abs_kmh, sp);
    read(s, "plausibility_rel", q.plausibility_rel, sp);
    read(s, "plausibility_persist_s", q.plausibility_persist_s, sp);
    read(s, "tss_min_kmh", q.tss_min_kmh, sp);
    read(s, "tss_hysteresis_kmh", q.tss_hysteresis_kmh, sp);
    read(s, "slip_band_kmh", q.slip_band_kmh, sp);
    read(s, "slip_persist_s", q.slip_persist_s, sp);
    if (q.window_min < 1 || q.window_max < q.window_min)
      throw Error("CONFIG_INVALID", sp + ".window_min/window_max: need 1 <= min <= max");
  }
  if (j.contains("rider")) {
    const auto& r = j.at("rider");
    const std::string rp = path + ".rider";
    check_keys(r, {"kp_per_kmh", "ki_per_kmh_s", "full_open_grip", "brake_decel_mps2", "dead_man_decay_s"}, rp);
    read(r, "kp_per_kmh", p.rider.kp_per_kmh, rp);
    read(r, "ki_per_kmh_s", p.rider.ki_per_kmh_s, rp);
    read(r, "full_open_grip", p.rider.full_open_grip, rp);
    read(r, "brake_decel_mps2", p.rider.brake_decel_mps2, rp);
    read(r, "dead_man_decay_s", p.rider.dead_man_decay_s, rp);
  }
  read(j, "heartbeat_timeout_s", p.heartbeat_timeout_s, path);
  read(j, "eco_baseline_l_per_100km", p.eco_baseline_l_per_100km, path);
}

/// Parses one command object; shared by scenario scripts and the live stream.
inline Command parse_command(const json& e, const std::string& path) {
  auto num = [&](const char* k) {
    if (!e.contains(k) || !e.at(k).is_number()) throw Error("CONFIG_INVALID", path + "." + k + ": expected a number");
    return e.at(k).get<double>();
  };
  auto str = [&](const char* k) {
    if (!e.contains(k) || !e.at(k).is_string()) throw Error("CONFIG_INVALID", path + "." + k + ": expected a string");
    return e.at(k).get<std::string>();
  };
  auto flag = [&](const char* k) {
    if (!e.contains(k) || !e.at(k).is_boolean()) throw Error("CONFIG_INVALID", path + "." + k + ": expected a bool");
    return e.at(k).get<bool>();
  };
  if (!e.is_object() || !e.contains("type") || !e.at("type").is_string())
    throw Error("CONFIG_INVALID", path + ".type: expected a string");
  const auto type = e.at("type").get<std::string>();
  if (type == "grip") {
    const double g = num("value");
    if (g < 0.0 || g > 1.0) throw Error("CONFIG_INVALID", path + ".value: grip must lie in [0,1]");
    return GripCmd{g};
  }
  if (type == "brake") {
    const double b = num("value");
    if (b < 0.0 || b > 1.0) throw Error("CONFIG_INVALID", path + ".value: brake must lie in [0,1]");
    return BrakeCmd{b};
  }
  if (type == "cruise") {
    try {
      return CruiseCmd{cruise_from_string(str("command"))};
    } catch (const Error&) {
      throw Error("CONFIG_INVALID", path + ".command: expected SET|RESUME|CANCEL|PLUS|MINUS");
    }
  }
  if (type == "mode") {
    try {
      return ModeCmd{mode_from_string(str("value"))};
    } catch (const Error&) {
      throw Error("CONFIG_INVALID", path + ".value: expected ORIGINAL|VC");
    }
  }
  if (type == "record") return RecordCmd{flag("value")};
  if (type == "fault") {
    try {
      return FaultCmd{mecu::error_from_string(str("id")), flag("active")};
    } catch (const Error& err) {
      if (err.code() == "CONFIG_INVALID") throw;
      throw Error("CONFIG_INVALID", path + ".id: unknown error id");
    }
  }
  if (type == "silence") {
    try {
      return NodeSilenceCmd{node_from_string(str("node")), flag("value")};
    } catch (const Error& err) {
      if (err.code() == "CONFIG_INVALID" && std::string(err.what()).find(path) != std::string::npos) throw;
      throw Error("CONFIG_INVALID", path + ".node: expected TPS|TVA|HMI");
    }
  }
  if (type == "wss_gain") {
    const double ch = num("channel");
    if (ch != 0.0 && ch != 1.0) throw Error("CONFIG_INVALID", path + ".channel: expected 0 or 1");
    const double g = num("value");
    if (!(g > 0.0)) throw Error("CONFIG_INVALID", path + ".value: gain must be positive");
    return WssGainCmd{static_cast<int>(ch), g};
  }
  if (type == "reset") return OperatorResetCmd{};
  throw Error("CONFIG_INVALID", path + ".type: unknown command '" + type + "'");
}

}  // namespace detail

ScenarioConfig builtin_scenario(const std::string& name, double fuel_scale = 0.1, std::uint64_t seed = 1);

/// Parses a scenario document. A "builtin" key seeds the config from one of
/// the built-in scenarios before the remaining fields are applied.
inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::read;
  detail::check_keys(j, {"name", "builtin", "fuel_scale", "duration_s", "dt_s", "control_period_s", "preroll_s",
                         "initial_speed_kmh", "mode", "script", "grade", "route", "params", "seed"},
                     "$");
  ScenarioConfig c;
  if (j.contains("builtin")) {
    double scale = 0.1;
    read(j, "fuel_scale", scale, "$");
    std::uint64_t seed = 1;
    read(j, "seed", seed, "$");
    c = builtin_scenario(j.at("builtin").get<std::string>(), scale, seed);
  }
  read(j, "name", c.name, "$");
  read(j, "duration_s", c.duration_s, "$");
  read(j, "dt_s", c.dt_s, "$");
  read(j, "control_period_s", c.control_period_s, "$");
  read(j, "preroll_s", c.preroll_s, "$");
  read(j, "initial_speed_kmh", c.initial_speed_kmh, "$");
  read(j, "seed", c.seed, "$");
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "original")
      c.mode = ModeSelection::Original;
    else if (m == "vc")
      c.mode = ModeSelection::VelocityControl;
    else if (m == "both")
      c.mode = ModeSelection::Both;
    else
      throw Error("CONFIG_INVALID", "$.mode: expected original|vc|both");
  }
  if (j.contains("script")) {
    const auto& s = j.at("script");
    if (!s.is_array()) throw Error("CONFIG_INVALID", "$.script: expected an array");
    c.script.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "$.script[" + std::to_string(i) + "]";
      if (!s[i].is_object() || !s[i].contains("t") || !s[i].at("t").is_number())
        throw Error("CONFIG_INVALID", path + ".t: expected a number");
      c.script.push_back({s[i].at("t").get<double>(), detail::parse_command(s[i], path)});
    }
  }
  if (j.contains("grade")) {
    const auto& g = j.at("grade");
    detail::check_keys(g, {"by", "points"}, "$.grade");
    c.grade = {};
    if (g.contains("by")) {
      const auto by = g.at("by").get<std::string>();
      if (by == "time")
        c.grade.key = GradeProfile::Key::Time;
      else if (by == "position")
        c.grade.key = GradeProfile::Key::Position;
      else
        throw Error("CONFIG_INVALID", "$.grade.by: expected time|position");
    }
    if (g.contains("points")) {
      for (std::size_t i = 0; i < g.at("points").size(); ++i) {
        const auto& p = g.at("points")[i];
        const std::string path = "$.grade.points[" + std::to_string(i) + "]";
        if (!p.contains("at") || !p.contains("grade")) throw Error("CONFIG_INVALID", path + ": needs 'at' and 'grade'");
        c.grade.points.push_back({p.at("at").get<double>(), p.at("grade").get<double>()});
      }
    }
  }
  if (j.contains("route")) {
    c.route.clear();
    const auto& r = j.at("route");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string path = "$.route[" + std::to_string(i) + "]";
      detail::check_keys(r[i], {"length_m", "speed_kmh", "grade", "stop_s", "kind"}, path);
      RouteLeg leg{0.0, 0.0};
      read(r[i], "length_m", leg.length_m, path);
      read(r[i], "speed_kmh", leg.speed_kmh, path);
      read(r[i], "grade", leg.grade, path);
      read(r[i], "stop_s", leg.stop_s, path);
      if (r[i].contains("kind")) {
        const auto k = r[i].at("kind").get<std::string>();
        if (k != "urban" && k != "rural") throw Error("CONFIG_INVALID", path + ".kind: expected urban|rural");
        leg.kind = k == "urban" ? LegKind::Urban : LegKind::Rural;
      }
      c.route.push_back(leg);
    }
  }
  if (j.contains("params")) detail::apply_params(j.at("params"), c.params, "$.params");
  c.validate();
  return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IO_ERROR", "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error("CONFIG_INVALID", path + ": " + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_json_file(path)); }

/// Merges a params-only document (the `--params` file) into a config.
inline void apply_params_file(ScenarioConfig& c, const nlohmann::json& j) {
  detail::apply_params(j, c.params, "params");
  c.validate();
}

// ---- built-in scenarios ----------------------------------------------------------

/// Full-grip launch from standstill on level ground.
inline ScenarioConfig scenario_s1() {
  ScenarioConfig c;
  c.name = "S1";
  c.duration_s = 60.0;
  c.script = {{0.0, GripCmd{1.0}}};
  return c;
}

/// Settled at top speed, small bump, then an 8 % downhill from t = 4.75 s.
inline ScenarioConfig scenario_s2() {
  ScenarioConfig c;
  c.name = "S2";
  c.duration_s = 20.0;
  c.preroll_s = 60.0;
  c.initial_speed_kmh = 45.0;
  c.script = {{0.0, GripCmd{1.0}}};
  c.grade.points = {{0.0, 0.0}, {4.45, 0.0}, {4.55, 0.03}, {4.65, 0.0}, {4.75, -0.08}};
  return c;
}

/// Full-grip launch on a 15 % downhill, level road from t = 16 s.
inline ScenarioConfig scenario_s3() {
  ScenarioConfig c;
  c.name = "S3";
  c.duration_s = 40.0;
  c.script = {{0.0, GripCmd{1.0}}};
  c.grade.points = {{0.0, -0.15}, {16.0, -0.15}, {17.0, 0.0}};
  return c;
}

inline constexpr double kStepPlateauS = 60.0;

/// Set-point staircase 0 -> 10 -> 20 -> 30 -> 40 -> 45 km/h.
inline ScenarioConfig step_cycle_incremental(double plateau_s = kStepPlateauS, double v_max_kmh = 45.0) {
  ScenarioConfig c;
  c.name = "STEP_INCREMENTAL";
  c.mode = ModeSelection::VelocityControl;
  const double steps[] = {10.0, 20.0, 30.0, 40.0, 45.0};
  double t = 0.0;
  for (double v : steps) {
    c.script.push_back({t, GripCmd{v / v_max_kmh}});
    t += plateau_s;
  }
  c.duration_s = t;
  return c;
}

/// Launches from standstill: 0 -> 10 -> 0 -> 20 -> 0 -> ... -> 45 km/h.
inline ScenarioConfig step_cycle_initial(double plateau_s = kStepPlateauS, double v_max_kmh = 45.0) {
  ScenarioConfig c;
  c.name = "STEP_INITIAL";
  c.mode = ModeSelection::VelocityControl;
  const double steps[] = {10.0, 20.0, 30.0, 40.0, 45.0};
  double t = 0.0;
  for (double v : steps) {
    c.script.push_back({t, GripCmd{v / v_max_kmh}});
    t += plateau_s;
    c.script.push_back({t, GripCmd{0.0}});
    c.script.push_back({t, BrakeCmd{0.5}});
    t += plateau_s / 2.0;
    c.script.push_back({t, BrakeCmd{0.0}});
  }
  c.duration_s = t;
  return c;
}

struct StepCycles {
  ScenarioConfig incremental;
  ScenarioConfig initial;
};

inline StepCycles step_cycle(double plateau_s = kStepPlateauS) {
  return {step_cycle_incremental(plateau_s), step_cycle_initial(plateau_s)};
}

inline constexpr double kFuelCycleFullLengthM = 50400.0;
inline constexpr double kUrbanShare = 0.61;

/// Synthetic road cycle: 61 % of distance urban (25-35 km/h, frequent stops),
/// 39 % rural at the speed limit over a mild grade profile. `scale` = 1 gives
/// the full 50.4 km; legs are generated from a seeded engine.
inline ScenarioConfig fuel_cycle(double scale = 0.1, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.name = "FUEL_CYCLE";
  c.seed = seed;
  const double total = kFuelCycleFullLengthM * scale;
  const double urban = total * kUrbanShare;
  const double rural = total - urban;
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

  constexpr double kUrbanLegM = 600.0;
  constexpr double kRuralLegM = 320.0;
  auto urban_block = [&](double length) {
    const int n = std::max(1, static_cast<int>(std::lround(length / kUrbanLegM)));
    for (int i = 0; i < n; ++i) {
      const double speed = 25.0 + 5.0 * pick(3);
      const double grade = 0.005 * (pick(3) - 1);
      const double stop = 5.0 + 5.0 * pick(3);
      c.route.push_back({length / n, speed, grade, stop, LegKind::Urban});
    }
  };
  auto rural_block = [&](double length) {
    const int n = std::max(6, static_cast<int>(std::lround(length / kRuralLegM)));
    static constexpr double grades[] = {0.0, 0.01, 0.0, -0.01, 0.005, -0.005};
    for (int i = 0; i < n; ++i)
      c.route.push_back({length / n, 45.0, grades[i % 6], 0.0, LegKind::Rural});
  };
  urban_block(urban / 2.0);
  c.route.back().stop_s = 0.0;  // leave town without stopping
  rural_block(rural);
  urban_block(urban / 2.0);
  // Duration is a cap; the run ends when the route is complete.
  c.duration_s = total / kmh_to_mps(15.0) + 600.0;
  return c;
}

inline ScenarioConfig builtin_scenario(const std::string& name, double fuel_scale, std::uint64_t seed) {
  if (name == "S1") return scenario_s1();
  if (name == "S2") return scenario_s2();
  if (name == "S3") return scenario_s3();
  if (name == "STEP_INCREMENTAL") return step_cycle_incremental();
  if (name == "STEP_INITIAL") return step_cycle_initial();
  if (name == "FUEL_CYCLE") return fuel_cycle(fuel_scale, seed);
  throw Error("CONFIG_INVALID", "$.builtin: unknown scenario '" + name + "'");
}

}  // namespace vcsim::harness
