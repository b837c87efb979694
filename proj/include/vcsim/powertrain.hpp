#pragma once

// Throttle valve + ignition timing -> wheel power, injection and fuel totals.
// Ignition angles are signed degrees, positive = before TDC.

#include <cmath>

#include "vcsim/common.hpp"
#include "vcsim/dynamics.hpp"

namespace vcsim::powertrain {

struct PowertrainParams {
  double idle_throttle_fraction = 0.04;
  double throttle_exponent = 1.4;
  double idle_fuel_rate_mlps = 0.07;
  double fuel_energy_density_Jpml = 32000.0;
  double base_indicated_efficiency = 0.1163264970619857;  // fitted by `vcsim calibrate`
  double retard_efficiency_coeff = 0.25 / (21.0 * 21.0);
  double efficiency_floor = 0.4;
  double optimal_ignition_deg = 5.0;
  double restricted_ignition_deg = -16.0;
  double restriction_band_kmh = 1.0;
  double tva_time_constant_s = 0.008;
  double tva_slew_limit_per_s = 25.0;
  double clutch_engage_kmh = 15.0;
  double clutch_launch_fraction = 0.3;
  double v_limit_original_kmh = 48.7;
  double rpm_idle = 1800.0;
  double rpm_max = 7500.0;

  void validate() const {
    auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
    if (!in_unit(base_indicated_efficiency) || !in_unit(efficiency_floor))
      throw Error("CONFIG_INVALID", "powertrain efficiencies must lie in (0,1]");
    if (idle_throttle_fraction < 0.0 || idle_throttle_fraction >= 1.0)
      throw Error("CONFIG_INVALID", "idle_throttle_fraction must lie in [0,1)");
    if (!(throttle_exponent > 0.0)) throw Error("CONFIG_INVALID", "throttle_exponent must be positive");
    if (!(fuel_energy_density_Jpml > 0.0) || idle_fuel_rate_mlps < 0.0)
      throw Error("CONFIG_INVALID", "fuel parameters out of range");
    if (!(tva_time_constant_s > 0.0) || !(tva_slew_limit_per_s > 0.0))
      throw Error("CONFIG_INVALID", "TVA dynamics must be positive");
    if (!(clutch_engage_kmh > 0.0) || clutch_launch_fraction <= 0.0 || clutch_launch_fraction > 1.0)
      throw Error("CONFIG_INVALID", "clutch parameters out of range");
    if (!(restriction_band_kmh > 0.0)) throw Error("CONFIG_INVALID", "restriction_band_kmh must be positive");
  }
};

struct PowertrainState {
  double throttle_cmd = 0.0;
  double throttle_actual = 0.0;
  double ignition_deg = 5.0;
  double indicated_W = 0.0;
  double brake_W = 0.0;
  double fuel_rate_mlps = 0.0;
  double fuel_total_ml = 0.0;
  Mode mode = Mode::VelocityControl;
  bool engine_running = true;
};

/// First-order lag with a slew limit, exactly discretized for the lag part.
inline double tva_track(double position, double cmd, double dt_s, const PowertrainParams& p) {
  const double lag = (cmd - position) * (1.0 - std::exp(-dt_s / p.tva_time_constant_s));
  const double max_move = p.tva_slew_limit_per_s * dt_s;
  return clamp(position + clamp(lag, -max_move, max_move), 0.0, 1.0);
}

/// Throttle opening -> fraction of full-throttle power.
inline double throttle_power_fraction(double throttle, const PowertrainParams& p) {
  const double u = clamp(throttle, 0.0, 1.0);
  return p.idle_throttle_fraction + (1.0 - p.idle_throttle_fraction) * (1.0 - std::pow(1.0 - u, p.throttle_exponent));
}

/// Inverse of throttle_power_fraction, clamped to [0,1].
inline double throttle_for_power_fraction(double fraction, const PowertrainParams& p) {
  const double x = (fraction - p.idle_throttle_fraction) / (1.0 - p.idle_throttle_fraction);
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - x, 1.0 / p.throttle_exponent);
}

inline double indicated_power(double throttle_actual, double v_mps, const dynamics::PowerCurve& curve,
                              const PowertrainParams& p) {
  return throttle_power_fraction(throttle_actual, p) * curve(v_mps);
}

inline double ignition_efficiency(double angle_deg_btdc, const PowertrainParams& p) {
  const double d = angle_deg_btdc - p.optimal_ignition_deg;
  return clamp(1.0 - p.retard_efficiency_coeff * d * d, p.efficiency_floor, 1.0);
}

/// Retard coefficient that yields `target_eta` at the restricted angle.
inline double calibrate_retard_coeff(double target_eta, const PowertrainParams& p) {
  const double d = p.restricted_ignition_deg - p.optimal_ignition_deg;
  return (1.0 - target_eta) / (d * d);
}

/// Factory engine-controller limiter: optimal timing below the band, linear
/// retard across it, fully retarded at and above the limit speed.
inline double ec_original_restriction(double v_kmh, const PowertrainParams& p) {
  const double start = p.v_limit_original_kmh - p.restriction_band_kmh;
  if (v_kmh <= start) return p.optimal_ignition_deg;
  if (v_kmh >= p.v_limit_original_kmh) return p.restricted_ignition_deg;
  const double f = (v_kmh - start) / p.restriction_band_kmh;
  return p.optimal_ignition_deg + f * (p.restricted_ignition_deg - p.optimal_ignition_deg);
}

inline double brake_power(double ignition_deg, double throttle_actual, double v_mps,
                          const dynamics::PowerCurve& curve, const PowertrainParams& p) {
  return ignition_efficiency(ignition_deg, p) * indicated_power(throttle_actual, v_mps, curve, p);
}

/// Port injection at lambda = 1: fuel follows inducted air, which follows
/// indicated power. Never below the idle rate while running.
inline double injection_rate(double indicated_W, const PowertrainParams& p) {
  return std::max(p.idle_fuel_rate_mlps, indicated_W / (p.base_indicated_efficiency * p.fuel_energy_density_Jpml));
}

/// Litres per 100 km.
inline double consumption(double fuel_ml, double distance_m) {
  if (!(distance_m > 0.0)) throw Error("INVALID_ARGUMENT", "distance must be positive");
  return (fuel_ml / 1000.0) / (distance_m / 100000.0);
}

inline constexpr double kCo2GramsPerLitre = 2280.0;

inline double co2_equivalent(double litres) { return kCo2GramsPerLitre * litres; }

/// Centrifugal clutch transmission share, smooth from the launch floor to 1.
inline double clutch_factor(double v_kmh, const PowertrainParams& p) {
  const double s = smoothstep(std::max(0.0, v_kmh) / p.clutch_engage_kmh);
  return p.clutch_launch_fraction + (1.0 - p.clutch_launch_fraction) * s;
}

/// Display-only engine speed; the CVT ratio is not simulated.
inline double engine_rpm(double v_kmh, bool running, const PowertrainParams& p) {
  if (!running) return 0.0;
  const double shape =
      0.55 * smoothstep(v_kmh / p.clutch_engage_kmh) + 0.45 * clamp(v_kmh / p.v_limit_original_kmh, 0.0, 1.0);
  return p.rpm_idle + (p.rpm_max - p.rpm_idle) * shape;
}

/// Owns the actuator and fuel integrator between physics steps.
class Powertrain {
 public:
  Powertrain(const dynamics::PowerCurve& curve, PowertrainParams params) : curve_(curve), p_(params) {
    state_.ignition_deg = p_.optimal_ignition_deg;
    state_.fuel_rate_mlps = p_.idle_fuel_rate_mlps;
  }

  /// Advances the actuator and fuel totals by dt. `ignition_deg` comes from the
  /// engine controller. Returns the tractive force at the wheel.
  double step(double throttle_cmd, double ignition_deg, double v_mps, double dt_s) {
    state_.throttle_cmd = clamp(throttle_cmd, 0.0, 1.0);
    state_.throttle_actual = tva_track(state_.throttle_actual, state_.throttle_cmd, dt_s, p_);
    state_.ignition_deg = ignition_deg;
    const double prev_rate = state_.fuel_rate_mlps;
    if (state_.engine_running) {
      state_.indicated_W = indicated_power(state_.throttle_actual, v_mps, curve_, p_);
      state_.brake_W = ignition_efficiency(ignition_deg, p_) * state_.indicated_W;
      state_.fuel_rate_mlps = injection_rate(state_.indicated_W, p_);
    } else {
      state_.indicated_W = 0.0;
      state_.brake_W = 0.0;
      state_.fuel_rate_mlps = 0.0;
    }
    state_.fuel_total_ml += 0.5 * (prev_rate + state_.fuel_rate_mlps) * dt_s;
    return clutch_factor(mps_to_kmh(v_mps), p_) * dynamics::drive_force(state_.brake_W, v_mps);
  }

  void shut_down() {
    state_.engine_running = false;
    state_.fuel_rate_mlps = 0.0;
  }
  void restart() { state_.engine_running = true; }
  void set_mode(Mode m) { state_.mode = m; }

  const PowertrainState& state() const { return state_; }
  const PowertrainParams& params() const { return p_; }
  const dynamics::PowerCurve& curve() const { return curve_; }

 private:
  dynamics::PowerCurve curve_;
  PowertrainParams p_;
  PowertrainState state_;
};

}  // namespace vcsim::powertrain
