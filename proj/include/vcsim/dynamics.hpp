#pragma once

// Longitudinal scooter model: resistance forces, drive force from wheel power,
// fixed-step semi-implicit Euler integration.

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "vcsim/common.hpp"

namespace vcsim::dynamics {

struct VehicleParams {
  double frontal_area_m2 = 0.78;
  double wheel_radius_m = 0.226;
  double inertia_front_Nms2 = 0.327;
  double inertia_rear_Nms2 = 1.3228;
  double mass_scooter_kg = 99.0;
  double mass_rider_kg = 80.0;
  double drag_coeff = 0.64;
  double rolling_coeff = 0.015;
  double air_density = 1.225;
  double gravity = kGravity;

  double total_mass_kg() const { return mass_scooter_kg + mass_rider_kg; }

  void validate() const {
    const std::array<double, 10> all{frontal_area_m2, wheel_radius_m,  inertia_front_Nms2, inertia_rear_Nms2,
                                     mass_scooter_kg, mass_rider_kg,   drag_coeff,         rolling_coeff,
                                     air_density,     gravity};
    for (double x : all)
      if (!(x > 0.0)) throw Error("CONFIG_INVALID", "vehicle parameters must be strictly positive");
  }
};

struct VehicleState {
  double t_s = 0.0;
  double x_m = 0.0;
  double v_mps = 0.0;
  double a_mps2 = 0.0;
  double grade = 0.0;  // rise/run, negative downhill
};

/// Launch regularization for P/v at standstill.
inline constexpr double kLaunchSpeedEps = 0.5;

inline double air_force(double v_mps, const VehicleParams& p) {
  return 0.5 * p.frontal_area_m2 * p.air_density * p.drag_coeff * v_mps * v_mps;
}

inline double rolling_force(double grade, const VehicleParams& p) {
  return p.rolling_coeff * p.total_mass_kg() * p.gravity * std::cos(std::atan(grade));
}

inline double grade_force(double grade, const VehicleParams& p) {
  return p.total_mass_kg() * p.gravity * std::sin(std::atan(grade));
}

inline double resistance_force(const VehicleState& s, const VehicleParams& p) {
  return air_force(s.v_mps, p) + rolling_force(s.grade, p) + grade_force(s.grade, p);
}

/// Translational mass plus the wheel inertias reflected to the contact patch.
inline double equivalent_mass(const VehicleParams& p) {
  const double r = p.wheel_radius_m;
  return p.total_mass_kg() + (p.inertia_front_Nms2 + p.inertia_rear_Nms2) / (r * r);
}

inline double drive_force(double wheel_power_W, double v_mps) {
  return wheel_power_W / std::max(v_mps, kLaunchSpeedEps);
}

/// Advance one fixed step. `drive_N` is the net tractive force (brake force
/// enters with negative sign). Velocity never goes negative.
inline VehicleState step(const VehicleState& s, double drive_N, const VehicleParams& p, double dt_s) {
  VehicleState n = s;
  const double a = (drive_N - resistance_force(s, p)) / equivalent_mass(p);
  n.v_mps = std::max(0.0, s.v_mps + a * dt_s);
  n.a_mps2 = (n.v_mps - s.v_mps) / dt_s;
  n.x_m = s.x_m + n.v_mps * dt_s;
  n.t_s = s.t_s + dt_s;
  return n;
}

/// Tracks net work against kinetic-energy change over a run.
class EnergyLedger {
 public:
  void add(double net_force_N, double v0_mps, double v1_mps, double dt_s) {
    const double dw = net_force_N * 0.5 * (v0_mps + v1_mps) * dt_s;
    work_J_ += dw;
    gross_J_ += std::abs(dw);
  }
  double work_J() const { return work_J_; }
  double gross_work_J() const { return gross_J_; }

  /// |W - dKE| relative to the larger of |dKE| and gross work moved.
  double relative_error(double m_eq, double v_start, double v_end) const {
    const double dke = 0.5 * m_eq * (v_end * v_end - v_start * v_start);
    const double scale = std::max(std::abs(dke), gross_J_);
    return scale > 0.0 ? std::abs(work_J_ - dke) / scale : 0.0;
  }

 private:
  double work_J_ = 0.0;
  double gross_J_ = 0.0;
};

struct PowerAnchor {
  double v_kmh;
  double power_W;
};

/// Full-throttle wheel power over speed. The polynomial is valid between the
/// first and last anchor; below it the first-anchor power is held (the clutch
/// factor shapes the launch), above it the curve continues linearly.
class PowerCurve {
 public:
  PowerCurve() = default;
  PowerCurve(std::vector<double> coeffs, double v_lo_mps, double v_hi_mps)
      : coeffs_(std::move(coeffs)), v_lo_(v_lo_mps), v_hi_(v_hi_mps) {}

  /// Raw polynomial in v [m/s], ascending coefficients.
  double polynomial(double v_mps) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * v_mps + *it;
    return acc;
  }

  double slope(double v_mps) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * v_mps + static_cast<double>(i) * coeffs_[i];
    return acc;
  }

  double operator()(double v_mps) const {
    double p;
    if (v_mps < v_lo_)
      p = polynomial(v_lo_);
    else if (v_mps > v_hi_)
      p = polynomial(v_hi_) + slope(v_hi_) * (v_mps - v_hi_);
    else
      p = polynomial(v_mps);
    return std::max(0.0, p);
  }

  const std::vector<double>& coefficients() const { return coeffs_; }
  double v_min_mps() const { return v_lo_; }
  double v_max_mps() const { return v_hi_; }

 private:
  std::vector<double> coeffs_{0.0};
  double v_lo_ = 0.0;
  double v_hi_ = 0.0;
};

inline std::vector<PowerAnchor> default_power_anchors() {
  return {{5.0, 500.0}, {15.0, 1500.0}, {25.0, 1600.0}, {40.0, 1400.0}, {55.0, 1150.0}};
}

namespace detail {

// Dense Gaussian elimination with partial pivoting; n is tiny (<= 5).
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) throw Error("CONFIG_INVALID", "power anchors are degenerate");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k] * x[k];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace detail

/// Least-squares polynomial (degree min(4, n-1)) through the anchors.
/// Throws CONFIG_INVALID on fewer than 4 anchors, non-increasing speeds, or a
/// fit that dips below zero between the first and last anchor.
inline PowerCurve fit_power_curve(std::span<const PowerAnchor> anchors) {
  if (anchors.size() < 4) throw Error("CONFIG_INVALID", "power curve needs at least 4 anchors");
  for (std::size_t i = 1; i < anchors.size(); ++i)
    if (!(anchors[i].v_kmh > anchors[i - 1].v_kmh))
      throw Error("CONFIG_INVALID", "power anchor speeds must be strictly increasing");

  const std::size_t deg = std::min<std::size_t>(4, anchors.size() - 1);
  const double v_lo = kmh_to_mps(anchors.front().v_kmh);
  const double v_hi = kmh_to_mps(anchors.back().v_kmh);
  // Normal equations in a scaled variable u = v / v_hi to keep conditioning sane.
  const std::size_t n = deg + 1;
  std::vector<std::vector<double>> ata(n, std::vector<double>(n, 0.0));
  std::vector<double> atb(n, 0.0);
  for (const auto& a : anchors) {
    const double u = kmh_to_mps(a.v_kmh) / v_hi;
    std::vector<double> row(n);
    double pw = 1.0;
    for (std::size_t k = 0; k < n; ++k, pw *= u) row[k] = pw;
    for (std::size_t i = 0; i < n; ++i) {
      atb[i] += row[i] * a.power_W;
      for (std::size_t j = 0; j < n; ++j) ata[i][j] += row[i] * row[j];
    }
  }
  std::vector<double> c = detail::solve(ata, atb);
  double scale = 1.0;
  for (auto& ck : c) {
    ck /= scale;
    scale *= v_hi;
  }
  PowerCurve curve(std::move(c), v_lo, v_hi);

  constexpr int kScan = 1000;
  for (int i = 0; i <= kScan; ++i) {
    const double v = v_lo + (v_hi - v_lo) * i / kScan;
    if (curve.polynomial(v) < 0.0)
      throw Error("CONFIG_INVALID", "power curve fit is negative inside the anchor range");
  }
  return curve;
}

inline PowerCurve default_power_curve() {
  const auto anchors = default_power_anchors();
  return fit_power_curve(anchors);
}

/// Level-road speed where full-throttle power equals resistance power.
/// Returns 0 if the curve never overcomes resistance.
inline double unrestricted_top_speed_mps(const PowerCurve& curve, const VehicleParams& p, double power_scale = 1.0) {
  auto surplus = [&](double v) {
    VehicleState s;
    s.v_mps = v;
    return power_scale * curve(v) - resistance_force(s, p) * v;
  };
  double lo = 0.1;
  double hi = 60.0;
  if (surplus(lo) <= 0.0) return 0.0;
  while (surplus(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (surplus(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace vcsim::dynamics
