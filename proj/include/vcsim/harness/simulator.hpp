#pragma once

// Closed-loop scooter simulation. Physics runs at dt, sensing/supervision/
// control at the control period; one MeasurementRecord per control tick.

#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "vcsim/bus.hpp"
#include "vcsim/common.hpp"
#include "vcsim/control.hpp"
#include "vcsim/dynamics.hpp"
#include "vcsim/harness/scenario.hpp"
#include "vcsim/mecu.hpp"
#include "vcsim/powertrain.hpp"
#include "vcsim/sensing.hpp"

namespace vcsim::harness {

enum class CruiseState { Off, On, Unavailable };

inline const char* to_string(CruiseState s) {
  switch (s) {
    case CruiseState::On: return "ON";
    case CruiseState::Unavailable: return "UNAVAILABLE";
    default: return "OFF";
  }
}

inline CruiseState cruise_state_from_string(const std::string& s) {
  if (s == "ON") return CruiseState::On;
  if (s == "UNAVAILABLE") return CruiseState::Unavailable;
  if (s == "OFF") return CruiseState::Off;
  throw Error("INVALID_ARGUMENT", "unknown cruise state '" + s + "'");
}

struct MeasurementRecord {
  double t_s = 0.0;
  double grip = 0.0;
  double v_set_kmh = 0.0;
  double v_meas_kmh = 0.0;
  double v_true_kmh = 0.0;
  double x_m = 0.0;
  double tva_cmd_pct = 0.0;
  double tva_actual_pct = 0.0;
  double ignition_deg = 0.0;
  double engine_rpm = 0.0;
  double injection_mlps = 0.0;
  double fuel_ml = 0.0;
  double grade = 0.0;
  double pitch_deg = 0.0;
  Mode mode = Mode::VelocityControl;
  int failsafe_class = 0;
  CruiseState cruise = CruiseState::Off;
};

/// Rides a list of route legs: speed wish per leg, braking into stops, waiting.
class RouteRider {
 public:
  enum class Phase { Drive, Brake, Stopped, Done };

  RouteRider() = default;
  RouteRider(std::vector<RouteLeg> legs, RiderParams p, double v_max_kmh)
      : legs_(std::move(legs)), p_(p), v_max_kmh_(v_max_kmh) {
    if (legs_.empty()) phase_ = Phase::Done;
  }

  bool active() const { return !legs_.empty(); }
  bool done() const { return phase_ == Phase::Done; }
  Phase phase() const { return phase_; }
  std::size_t leg_index() const { return idx_; }

  double grade() const { return done() || legs_.empty() ? 0.0 : legs_[idx_].grade; }
  LegKind kind() const { return legs_.empty() ? LegKind::Urban : legs_[std::min(idx_, legs_.size() - 1)].kind; }

  struct Input {
    double grip;
    double brake;
  };

  /// Evaluated once per control tick.
  Input update(double x_m, double v_mps, double period_s) {
    if (done()) return {0.0, 1.0};
    const RouteLeg& leg = legs_[idx_];
    const double remaining = leg_start_ + leg.length_m - x_m;
    switch (phase_) {
      case Phase::Drive:
        if (leg.stop_s > 0.0 && remaining <= v_mps * v_mps / (2.0 * p_.brake_decel_mps2) + kBrakeMarginM) {
          phase_ = Phase::Brake;
          return update(x_m, v_mps, period_s);
        }
        if (leg.stop_s <= 0.0 && remaining <= 0.0) {
          next(x_m);
          return update(x_m, v_mps, period_s);
        }
        return {std::min(1.0, leg.speed_kmh / v_max_kmh_), 0.0};
      case Phase::Brake: {
        if (v_mps <= 0.0) {
          phase_ = Phase::Stopped;
          waited_ = 0.0;
          return {0.0, 1.0};
        }
        // Full brake for the last metre or at walking pace, so slopes cannot hold it rolling.
        if (remaining <= kMinBrakeDistM || v_mps < kCreepMps) return {0.0, 1.0};
        const double need = v_mps * v_mps / (2.0 * remaining);
        return {0.0, clamp(need / p_.brake_decel_mps2, 0.0, 1.0)};
      }
      case Phase::Stopped:
        waited_ += period_s;
        if (waited_ >= leg.stop_s - 1e-9) {
          next(x_m);
          return update(x_m, v_mps, period_s);
        }
        return {0.0, 1.0};
      case Phase::Done: break;
    }
    return {0.0, 1.0};
  }

 private:
  static constexpr double kBrakeMarginM = 2.0;
  static constexpr double kMinBrakeDistM = 1.0;
  static constexpr double kCreepMps = 1.0;

  void next(double x_m) {
    ++idx_;
    leg_start_ = x_m;
    phase_ = idx_ < legs_.size() ? Phase::Drive : Phase::Done;
    if (done()) idx_ = legs_.size() - 1;
  }

  std::vector<RouteLeg> legs_;
  RiderParams p_;
  double v_max_kmh_ = 45.0;
  std::size_t idx_ = 0;
  double leg_start_ = 0.0;
  double waited_ = 0.0;
  Phase phase_ = Phase::Drive;
};

/// Human throttle hand for the cable-equivalent ORIGINAL mode: grip is read
/// as an intended speed; near-full grip means wide open.
class RiderThrottle {
 public:
  explicit RiderThrottle(RiderParams p = {}) : p_(p) {}

  double update(double grip, double intent_kmh, double v_kmh, double period_s) {
    if (grip >= p_.full_open_grip) {
      integ_ = 0.0;
      return 1.0;
    }
    if (grip <= 0.0) {
      integ_ = 0.0;
      return 0.0;
    }
    const double dev = intent_kmh - v_kmh;
    const double u = p_.kp_per_kmh * dev + p_.ki_per_kmh_s * integ_;
    if (!((u >= 1.0 && dev > 0.0) || (u <= 0.0 && dev < 0.0))) integ_ += dev * period_s;
    return clamp(p_.kp_per_kmh * dev + p_.ki_per_kmh_s * integ_, 0.0, 1.0);
  }

  void reset() { integ_ = 0.0; }

 private:
  RiderParams p_;
  double integ_ = 0.0;
};

struct RunSummary {
  std::string scenario;
  Mode mode = Mode::VelocityControl;
  double duration_s = 0.0;
  double distance_m = 0.0;
  double urban_m = 0.0;
  double rural_m = 0.0;
  double fuel_ml = 0.0;
  double urban_fuel_ml = 0.0;
  double rural_fuel_ml = 0.0;
  double consumption_l_per_100km = std::numeric_limits<double>::quiet_NaN();
  double max_speed_kmh = 0.0;
  double energy_rel_error = 0.0;
  bool route_completed = false;
};

class Simulator {
 public:
  Simulator(const ScenarioConfig& cfg, Mode mode)
      : cfg_(cfg),
        mode_(mode),
        curve_(dynamics::fit_power_curve(cfg.params.power_anchors)),
        pt_(curve_, cfg.params.powertrain),
        wss_a_(cfg.params.encoder, cfg.params.sensing),
        wss_b_(cfg.params.encoder, cfg.params.sensing),
        tss_(cfg.params.sensing),
        plaus_(cfg.params.sensing),
        cruise_(cfg.params.cruise),
        heartbeat_(cfg.params.heartbeat_timeout_s),
        rider_(cfg.params.rider),
        route_(cfg.route, cfg.params.rider, cfg.params.controller.v_max_kmh) {
    cfg_.validate();
    steps_per_tick_ = cfg_.steps_per_tick();
    m_eq_ = dynamics::equivalent_mass(cfg_.params.vehicle);
    state_.v_mps = kmh_to_mps(cfg_.initial_speed_kmh);
    pt_.set_mode(mode_);
    last_ignition_ = cfg_.params.powertrain.optimal_ignition_deg;
    preroll_ticks_ = static_cast<long>(std::lround(cfg_.preroll_s / cfg_.control_period_s));
    for (long k = 0; k < preroll_ticks_; ++k) {
      (void)sample();
      advance();
    }
    x_offset_ = state_.x_m;
    fuel_offset_ = pt_.state().fuel_total_ml;
    ledger_ = {};
    v_start_ = state_.v_mps;
    urban_m_ = rural_m_ = urban_fuel_ml_ = rural_fuel_ml_ = 0.0;
    max_kmh_ = 0.0;
  }

  /// Queued; applied at the start of the next control tick.
  void push(const Command& c) { pending_.push_back(c); }

  /// Control tick at the current instant. Returns the record for this instant.
  MeasurementRecord sample() {
    // Pre-roll (negative log time) holds the t = 0 inputs.
    const double t = std::max(0.0, log_time());
    while (script_idx_ < cfg_.script.size() && cfg_.script[script_idx_].t_s <= t + 1e-9)
      apply(cfg_.script[script_idx_++].command);
    while (!pending_.empty()) {
      apply(pending_.front());
      pending_.pop_front();
    }
    const double period = cfg_.control_period_s;

    if (route_.active()) {
      const auto in = route_.update(state_.x_m - x_offset_, state_.v_mps, period);
      grip_ = in.grip;
      brake_ = in.brake;
    }
    if (dead_man_) grip_ = std::max(0.0, grip_ - dead_man_rate_ * period);

    // Sensing
    const auto ra = wss_a_.measure();
    const auto rb = wss_b_.measure();
    const double va = ra.ok() ? ra.kmh : 0.0;
    const double vb = rb.ok() ? rb.kmh : 0.0;
    v_meas_ = 0.5 * (va + vb);
    const bool plausible = plaus_.update(va, vb, period) == sensing::Plausibility::Ok;

    // Bus traffic and supervision
    const double now = internal_time();
    exchange(mecu::Node::Tps, 0x101, {{"grip", 100.0 * grip_}, {"tps_calibrated", 1.0}}, now);
    exchange(mecu::Node::Tva, 0x102, {{"tva_actual", 100.0 * pt_.state().throttle_actual}, {"tva_calibrated", 1.0}},
             now);
    exchange(mecu::Node::Hmi, 0x130, {{"mode", mode_ == Mode::Original ? 0.0 : 1.0}, {"recording", recording_ ? 1.0 : 0.0}},
             now);
    mecu::HealthReport h;
    h.tps_alive = heartbeat_.alive(mecu::Node::Tps, now);
    h.tva_alive = heartbeat_.alive(mecu::Node::Tva, now);
    h.hmi_alive = heartbeat_.alive(mecu::Node::Hmi, now);
    h.tps_comm_errors = comm_errors_[0];
    h.tva_comm_errors = comm_errors_[1];
    h.hmi_comm_errors = comm_errors_[2];
    h.wss_plausible = plausible;
    h.injected = injected_;
    const auto tr = mecu::transition(failsafe_, mecu::evaluate(h));
    failsafe_ = tr.status;
    if (failsafe_.ignition_relay == mecu::Relay::Open && pt_.state().engine_running) pt_.shut_down();

    // Set point
    const auto& cp = cfg_.params.controller;
    const bool cruise_ok = failsafe_.cruise_allowed && mode_ == Mode::VelocityControl;
    if (!cruise_ok || brake_ > 0.0) cruise_.disable();
    if (pending_cruise_) {
      cruise_status_ = cruise_.command(*pending_cruise_, v_meas_, cruise_ok);
      pending_cruise_.reset();
    }
    if (cruise_ok && cruise_status_ == control::CruiseStatus::Unavailable) cruise_status_ = control::CruiseStatus::Ok;
    const double grip_sp = control::grip_to_setpoint(grip_, cp);
    v_set_ = cruise_.effective_setpoint(grip_sp);

    // Throttle
    if (failsafe_.tva_override == mecu::TvaOverride::Reset) {
      throttle_cmd_ = 0.0;
      v_set_ = v_meas_;
      ctrl_ = {};
      rider_.reset();
    } else if (mode_ == Mode::VelocityControl) {
      throttle_cmd_ = control::update(ctrl_, v_set_, v_meas_, cp) / 100.0;
    } else {
      throttle_cmd_ = rider_.update(grip_, grip_sp, mps_to_kmh(state_.v_mps), period);
    }
    if (!pt_.state().engine_running) throttle_cmd_ = 0.0;

    return record();
  }

  /// Physics over one control period at the held actuator command.
  void advance() {
    const auto& vp = cfg_.params.vehicle;
    const auto& pp = cfg_.params.powertrain;
    for (int i = 0; i < steps_per_tick_; ++i) {
      const double t = std::max(0.0, log_time_at(step_count_));
      const double x = state_.x_m - x_offset_;
      state_.grade = cfg_.grade.at(t, x) + route_.grade();
      const double v_kmh = mps_to_kmh(state_.v_mps);
      const auto tss = tss_.measure(v_kmh);
      const auto ec = mecu::route_restriction(mode_, v_kmh, tss, pp, cfg_.params.emulation, cfg_.params.encoder);
      last_ignition_ = ec.ignition_deg;
      const double fuel0 = pt_.state().fuel_total_ml;
      const double drive = pt_.step(throttle_cmd_, ec.ignition_deg, state_.v_mps, cfg_.dt_s);
      const double brake_N = brake_ * cfg_.params.rider.brake_decel_mps2 * m_eq_;
      const double net = drive - brake_N - dynamics::resistance_force(state_, vp);
      const double v0 = state_.v_mps;
      const double x0 = state_.x_m;
      state_ = dynamics::step(state_, drive - brake_N, vp, cfg_.dt_s);
      ++step_count_;
      state_.t_s = internal_time();
      ledger_.add(net, v0, state_.v_mps, cfg_.dt_s);
      const bool urban = route_.kind() == LegKind::Urban;
      (urban ? urban_m_ : rural_m_) += state_.x_m - x0;
      (urban ? urban_fuel_ml_ : rural_fuel_ml_) += pt_.state().fuel_total_ml - fuel0;
      wss_a_.advance(state_.v_mps, cfg_.dt_s);
      wss_b_.advance(state_.v_mps, cfg_.dt_s);
      max_kmh_ = std::max(max_kmh_, mps_to_kmh(state_.v_mps));
    }
    ++tick_;
  }

  bool route_done() const { return route_.active() && route_.done(); }
  Mode mode() const { return mode_; }
  const mecu::FailSafeStatus& failsafe() const { return failsafe_; }
  const dynamics::VehicleState& vehicle() const { return state_; }
  const powertrain::PowertrainState& powertrain() const { return pt_.state(); }
  const control::ControllerState& controller() const { return ctrl_; }
  const ScenarioConfig& config() const { return cfg_; }
  bool recording() const { return recording_; }
  std::optional<double> cruise_target() const { return cruise_.engaged() ? cruise_.target() : std::nullopt; }
  double distance_m() const { return state_.x_m - x_offset_; }
  double fuel_ml() const { return pt_.state().fuel_total_ml - fuel_offset_; }
  double log_time() const { return static_cast<double>(tick_ - preroll_ticks_) * cfg_.control_period_s; }

  /// Physics steps taken since construction (including pre-roll).
  long step_count() const { return step_count_; }

  RunSummary summary() const {
    RunSummary s;
    s.scenario = cfg_.name;
    s.mode = mode_;
    s.duration_s = log_time();
    s.distance_m = distance_m();
    s.urban_m = urban_m_;
    s.rural_m = rural_m_;
    s.fuel_ml = fuel_ml();
    s.urban_fuel_ml = urban_fuel_ml_;
    s.rural_fuel_ml = rural_fuel_ml_;
    if (s.distance_m > 0.0) s.consumption_l_per_100km = powertrain::consumption(s.fuel_ml, s.distance_m);
    s.max_speed_kmh = max_kmh_;
    s.energy_rel_error = ledger_.relative_error(m_eq_, v_start_, state_.v_mps);
    s.route_completed = route_done();
    return s;
  }

 private:
  double internal_time() const { return static_cast<double>(step_count_) * cfg_.dt_s; }
  double log_time_at(long step) const { return static_cast<double>(step) * cfg_.dt_s - cfg_.preroll_s; }

  void apply(const Command& c) {
    std::visit(
        [this](const auto& cmd) {
          using T = std::decay_t<decltype(cmd)>;
          if constexpr (std::is_same_v<T, GripCmd>) {
            grip_ = clamp(cmd.value, 0.0, 1.0);
            dead_man_ = false;
          } else if constexpr (std::is_same_v<T, BrakeCmd>) {
            brake_ = clamp(cmd.value, 0.0, 1.0);
          } else if constexpr (std::is_same_v<T, CruiseCmd>) {
            pending_cruise_ = cmd.command;
          } else if constexpr (std::is_same_v<T, ModeCmd>) {
            if (cmd.mode != mode_) {
              mode_ = cmd.mode;
              pt_.set_mode(mode_);
              ctrl_ = {};
              rider_.reset();
              cruise_.disable();
            }
          } else if constexpr (std::is_same_v<T, RecordCmd>) {
            recording_ = cmd.on;
          } else if constexpr (std::is_same_v<T, FaultCmd>) {
            if (cmd.active)
              injected_.insert(cmd.id);
            else
              injected_.erase(cmd.id);
          } else if constexpr (std::is_same_v<T, NodeSilenceCmd>) {
            silent_[static_cast<std::size_t>(cmd.node)] = cmd.silent;
          } else if constexpr (std::is_same_v<T, WssGainCmd>) {
            (cmd.channel == 0 ? wss_a_ : wss_b_).set_gain(cmd.gain);
          } else if constexpr (std::is_same_v<T, OperatorResetCmd>) {
            failsafe_ = mecu::operator_reset(failsafe_);
            pt_.restart();
          } else if constexpr (std::is_same_v<T, DisconnectCmd>) {
            dead_man_ = true;
            dead_man_rate_ = grip_ / cfg_.params.rider.dead_man_decay_s;
          }
        },
        c);
  }

  void exchange(mecu::Node node, std::uint16_t id, const bus::SignalSet& signals, double now) {
    const auto n = static_cast<std::size_t>(node);
    if (silent_[n]) return;
    const auto frame = senders_.encode(id, signals, now);
    const auto d = receiver_.decode(frame);
    if (d.status == bus::DecodeStatus::Ok) {
      heartbeat_.seen(node, now);
      comm_errors_[n] = 0;
    } else {
      ++comm_errors_[n];
    }
  }

  MeasurementRecord record() const {
    const auto& ps = pt_.state();
    MeasurementRecord r;
    r.t_s = log_time();
    r.grip = grip_;
    r.v_set_kmh = v_set_;
    r.v_meas_kmh = v_meas_;
    r.v_true_kmh = mps_to_kmh(state_.v_mps);
    r.x_m = distance_m();
    r.tva_cmd_pct = 100.0 * throttle_cmd_;
    r.tva_actual_pct = 100.0 * ps.throttle_actual;
    r.ignition_deg = last_ignition_;
    r.engine_rpm = powertrain::engine_rpm(r.v_true_kmh, ps.engine_running, cfg_.params.powertrain);
    r.injection_mlps = ps.fuel_rate_mlps;
    r.fuel_ml = fuel_ml();
    r.grade = state_.grade;
    r.pitch_deg = std::atan(state_.grade) * 180.0 / std::numbers::pi;
    r.mode = mode_;
    r.failsafe_class = failsafe_.highest_class;
    if (cruise_.engaged())
      r.cruise = CruiseState::On;
    else if (!failsafe_.cruise_allowed || cruise_status_ == control::CruiseStatus::Unavailable)
      r.cruise = CruiseState::Unavailable;
    return r;
  }

  ScenarioConfig cfg_;
  Mode mode_;
  dynamics::PowerCurve curve_;
  powertrain::Powertrain pt_;
  sensing::WssChannel wss_a_;
  sensing::WssChannel wss_b_;
  sensing::TssSensor tss_;
  sensing::PlausibilityMonitor plaus_;
  control::ControllerState ctrl_;
  control::CruiseControl cruise_;
  control::CruiseStatus cruise_status_ = control::CruiseStatus::Ok;
  std::optional<control::CruiseCommand> pending_cruise_;
  mecu::FailSafeStatus failsafe_;
  mecu::HeartbeatMonitor heartbeat_;
  mecu::ErrorSet injected_;
  std::array<bool, mecu::kNodeCount> silent_{};
  std::array<int, mecu::kNodeCount> comm_errors_{};
  bus::Encoder senders_;
  bus::Decoder receiver_;
  RiderThrottle rider_;
  RouteRider route_;
  dynamics::VehicleState state_;
  dynamics::EnergyLedger ledger_;
  std::deque<Command> pending_;
  std::size_t script_idx_ = 0;

  int steps_per_tick_ = 20;
  long step_count_ = 0;
  long tick_ = 0;
  long preroll_ticks_ = 0;
  double m_eq_ = 0.0;
  double x_offset_ = 0.0;
  double fuel_offset_ = 0.0;
  double v_start_ = 0.0;
  double urban_m_ = 0.0;
  double rural_m_ = 0.0;
  double urban_fuel_ml_ = 0.0;
  double rural_fuel_ml_ = 0.0;
  double max_kmh_ = 0.0;
  double grip_ = 0.0;
  double brake_ = 0.0;
  double v_meas_ = 0.0;
  double v_set_ = 0.0;
  double throttle_cmd_ = 0.0;
  double last_ignition_ = 0.0;
  bool recording_ = false;
  bool dead_man_ = false;
  double dead_man_rate_ = 0.0;
};

struct RunResult {
  std::vector<MeasurementRecord> records;
  RunSummary summary;
};

/// Runs one mode to the end of the scenario (or until the route completes).
inline RunResult run(const ScenarioConfig& cfg, Mode mode) {
  Simulator sim(cfg, mode);
  RunResult out;
  const long ticks = std::lround(cfg.duration_s / cfg.control_period_s);
  out.records.reserve(static_cast<std::size_t>(ticks) + 1);
  for (long k = 0; k <= ticks; ++k) {
    out.records.push_back(sim.sample());
    if (k == ticks || sim.route_done()) break;
    sim.advance();
  }
  out.summary = sim.summary();
  return out;
}

inline std::vector<Mode> modes_of(ModeSelection s) {
  switch (s) {
    case ModeSelection::Original: return {Mode::Original};
    case ModeSelection::VelocityControl: return {Mode::VelocityControl};
    default: return {Mode::Original, Mode::VelocityControl};
  }
}

/// First instant the true speed reaches `v_kmh`, if ever.
inline std::optional<double> time_to_speed(const std::vector<MeasurementRecord>& recs, double v_kmh) {
  for (const auto& r : recs)
    if (r.v_true_kmh >= v_kmh) return r.t_s;
  return std::nullopt;
}

/// Peak of the true speed above `v_ref` after the first crossing of it.
inline double overshoot(const std::vector<MeasurementRecord>& recs, double v_ref, double t_from = 0.0,
                        double t_to = std::numeric_limits<double>::infinity()) {
  double peak = 0.0;
  for (const auto& r : recs)
    if (r.t_s >= t_from && r.t_s <= t_to) peak = std::max(peak, r.v_true_kmh - v_ref);
  return peak;
}

}  // namespace vcsim::harness
