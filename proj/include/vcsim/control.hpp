#pragma once

// Adaptive PI velocity controller, grip mapping and cruise set-point logic.
// Speeds in km/h, controller output in % throttle.

#include <cmath>
#include <optional>

#include "vcsim/common.hpp"

namespace vcsim::control {

struct Limits {
  double lo;
  double hi;
};

struct ControllerParams {
  double kp_min = 2.1;
  double kp_max = 16.0;
  double ki_min = 0.01;
  double ki_max = 0.075;
  double kt_min = 1.3;
  double kt_max = 6.3;
  double offset_kmh = 3.0;  // applies to the I schedule only
  double v_max_kmh = 45.0;
  Limits p_limits{-100.0, 100.0};
  Limits i_limits{0.0, 100.0};
  double cycle_time_s = 0.020;
  // Weight of one control tick in the integral sum (km/h per tick). The gain
  // table does not pin the unit; 0.4 was fitted on the incremental step cycle.
  double integrator_step = 0.4;

  /// Road-test gain set.
  static ControllerParams road() { return {}; }

  /// Gain set used during simulation-based tuning.
  static ControllerParams sim() {
    ControllerParams p;
    p.ki_min = 0.02;
    p.ki_max = 0.07;
    p.kt_min = 1.44;
    p.kt_max = 6.84;
    return p;
  }

  void validate() const {
    if (!(v_max_kmh > 0.0) || !(cycle_time_s > 0.0) || !(integrator_step > 0.0))
      throw Error("CONFIG_INVALID", "controller v_max, cycle time and integrator step must be positive");
    if (kp_max < kp_min || ki_max < ki_min || kt_max < kt_min || ki_min <= 0.0)
      throw Error("CONFIG_INVALID", "controller schedule endpoints must be ordered and K_I positive");
    if (p_limits.lo > p_limits.hi || i_limits.lo > i_limits.hi)
      throw Error("CONFIG_INVALID", "controller limits must be ordered");
  }
};

struct Gains {
  double kp;
  double ki;
};

inline Gains scheduled_gains(double v_sc_kmh, const ControllerParams& p) {
  const double kp = v_sc_kmh / p.v_max_kmh * (p.kp_max - p.kp_min) + p.kp_min;
  const double ki = (v_sc_kmh - p.offset_kmh) / p.v_max_kmh * (p.ki_max - p.ki_min) + p.ki_min;
  return {kp, std::max(ki, p.ki_min)};
}

/// Half-width of the error band in which the integrator runs.
inline double integrator_threshold(double v_set_kmh, const ControllerParams& p) {
  return v_set_kmh / p.v_max_kmh * (p.kt_max - p.kt_min) + p.kt_min;
}

struct ControllerState {
  double integrator = 0.0;
  bool i_enabled = false;
  double last_output = 0.0;
  double v_set = 0.0;
  double dev = 0.0;
};

/// One control tick. Integration is conditional (frozen while the output sits
/// at 100 % and the error would push it further) and magnitude-clamped so that
/// K_I * integrator stays inside the I limits.
inline double update(ControllerState& st, double v_set_kmh, double v_meas_kmh, const ControllerParams& p) {
  st.v_set = v_set_kmh;
  st.dev = v_set_kmh - v_meas_kmh;
  st.i_enabled = std::abs(st.dev) <= integrator_threshold(v_set_kmh, p);
  const Gains g = scheduled_gains(v_meas_kmh, p);

  if (!st.i_enabled) {
    st.integrator = 0.0;
  } else {
    const bool saturated_high = st.last_output >= 100.0 && st.dev > 0.0;
    if (!saturated_high) st.integrator += st.dev * p.integrator_step;
    st.integrator = clamp(st.integrator, p.i_limits.lo / g.ki, p.i_limits.hi / g.ki);
  }

  const double p_term = clamp(g.kp * st.dev, p.p_limits.lo, p.p_limits.hi);
  const double i_term = st.i_enabled ? g.ki * st.integrator : 0.0;
  st.last_output = clamp(p_term + i_term, 0.0, 100.0);
  return st.last_output;
}

inline double grip_to_setpoint(double grip, const ControllerParams& p) { return clamp(grip, 0.0, 1.0) * p.v_max_kmh; }

enum class CruiseCommand { Set, Resume, Cancel, Increase, Decrease };

enum class CruiseStatus { Ok, Unavailable };

enum class CruiseOverride {
  UpwardOnly,  // effective set point = max(target, grip)
  GripWhenOpen  // any non-zero grip replaces the target
};

struct CruiseParams {
  double min_kmh = 10.0;
  double max_kmh = 45.0;
  double step_kmh = 1.0;
  CruiseOverride override_policy = CruiseOverride::UpwardOnly;
};

class CruiseControl {
 public:
  explicit CruiseControl(CruiseParams p = {}) : p_(p) {}

  /// Applies a rider command. When the supervisor forbids cruise, the control
  /// disengages and reports Unavailable.
  CruiseStatus command(CruiseCommand c, double v_meas_kmh, bool allowed) {
    if (!allowed) {
      engaged_ = false;
      return CruiseStatus::Unavailable;
    }
    switch (c) {
      case CruiseCommand::Set:
        target_ = clamp(std::round(v_meas_kmh), p_.min_kmh, p_.max_kmh);
        engaged_ = true;
        break;
      case CruiseCommand::Resume:
        if (target_) engaged_ = true;
        break;
      case CruiseCommand::Cancel:
        engaged_ = false;
        break;
      case CruiseCommand::Increase:
      case CruiseCommand::Decrease:
        if (engaged_ && target_) {
          const double d = c == CruiseCommand::Increase ? p_.step_kmh : -p_.step_kmh;
          target_ = clamp(*target_ + d, p_.min_kmh, p_.max_kmh);
        }
        break;
    }
    return CruiseStatus::Ok;
  }

  /// Forced disengage from the supervisor.
  void disable() { engaged_ = false; }

  double effective_setpoint(double grip_setpoint_kmh) const {
    if (!engaged_ || !target_) return grip_setpoint_kmh;
    if (p_.override_policy == CruiseOverride::GripWhenOpen && grip_setpoint_kmh > 0.0) return grip_setpoint_kmh;
    return std::max(*target_, grip_setpoint_kmh);
  }

  bool engaged() const { return engaged_; }
  std::optional<double> target() const { return target_; }

 private:
  CruiseParams p_;
  bool engaged_ = false;
  std::optional<double> target_;
};

}  // namespace vcsim::control
