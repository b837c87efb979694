#pragma once

// Wheel-speed encoder emulation and decoding, redundancy checks, the inductive
// transmission speed sensor and the emulated TSS frequency.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vcsim/common.hpp"

namespace vcsim::sensing {

struct EncoderConfig {
  double wheel_circumference_m = 1.42;
  int n_steps = 48;
  double sample_clock_hz = 1.0e6;

  double step_distance_m() const { return wheel_circumference_m / n_steps; }
};

struct EmulationConfig {
  double gear_ratio = 13.0;
  int pole_count = 4;
};

struct SensingParams {
  double staleness_s = 0.200;
  double window_gain = 0.3;  // s_A per km/h
  int window_min = 2;
  int window_max = 16;
  double plausibility_abs_kmh = 0.5;
  double plausibility_rel = 0.02;
  double plausibility_persist_s = 0.100;
  double tss_min_kmh = 8.0;
  double tss_hysteresis_kmh = 0.5;
  double slip_band_kmh = 5.0;
  double slip_persist_s = 0.100;
};

/// Emits encoder edges from a velocity signal. Edge instants are latched on
/// the sample clock, so each width is a difference of quantized timestamps.
class PulseGenerator {
 public:
  explicit PulseGenerator(EncoderConfig cfg = {}) : cfg_(cfg) {}

  /// Integrates `v_mps` held over [t, t+dt) and appends the clock tick of every
  /// step boundary crossed to `edges`.
  void advance(double v_mps, double dt_s, std::vector<std::int64_t>& edges) {
    const double d_step = cfg_.step_distance_m();
    double remaining = dt_s;
    double t = t_s_;
    if (v_mps > 0.0) {
      while (travelled_m_ + v_mps * remaining >= d_step) {
        const double to_edge = (d_step - travelled_m_) / v_mps;
        t += to_edge;
        remaining -= to_edge;
        travelled_m_ = 0.0;
        edges.push_back(static_cast<std::int64_t>(std::floor(t * cfg_.sample_clock_hz)));
      }
      travelled_m_ += v_mps * remaining;
    }
    t_s_ += dt_s;
  }

  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  double t_s_ = 0.0;
  double travelled_m_ = 0.0;
};

/// Pulse widths [s] for a velocity trace sampled every `dt_s`.
inline std::vector<double> generate_pulses(std::span<const double> v_mps, double dt_s, const EncoderConfig& cfg = {}) {
  PulseGenerator gen(cfg);
  std::vector<std::int64_t> edges;
  for (double v : v_mps) gen.advance(std::max(0.0, v), dt_s, edges);
  std::vector<double> widths;
  for (std::size_t i = 1; i < edges.size(); ++i)
    widths.push_back(static_cast<double>(edges[i] - edges[i - 1]) / cfg.sample_clock_hz);
  return widths;
}

struct SpeedReading {
  enum class Status { Ok, Stale, LowSpeedInvalid };
  Status status = Status::Ok;
  double kmh = 0.0;

  bool ok() const { return status == Status::Ok; }
};

/// Velocity from the mean of the last `window` widths: d_step * s_A / sum(T).
inline double wss_velocity(std::span<const double> widths_s, const EncoderConfig& cfg) {
  double sum = 0.0;
  for (double w : widths_s) sum += w;
  return mps_to_kmh(cfg.step_distance_m() * static_cast<double>(widths_s.size()) / sum);
}

/// Averaging window that keeps the filter span short at speed.
inline int adaptive_window(double v_kmh, const SensingParams& p = {}) {
  const long n = std::lround(std::max(0.0, v_kmh) * p.window_gain);
  return static_cast<int>(std::clamp<long>(n, p.window_min, p.window_max));
}

/// Ring of recent pulse widths in clock ticks plus the newest edge instant.
class PulseBuffer {
 public:
  static constexpr std::size_t kCapacity = 32;

  void push_edge(std::int64_t tick) {
    if (last_edge_) {
      widths_[head_] = tick - *last_edge_;
      head_ = (head_ + 1) % kCapacity;
      count_ = std::min(count_ + 1, kCapacity);
    }
    last_edge_ = tick;
  }

  std::size_t size() const { return count_; }
  std::optional<std::int64_t> last_edge() const { return last_edge_; }

  /// Newest `n` widths in seconds (n clipped to what is stored).
  std::vector<double> newest(std::size_t n, double clock_hz) const {
    n = std::min(n, count_);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(static_cast<double>(widths_[(head_ + kCapacity - 1 - i) % kCapacity]) / clock_hz);
    return out;
  }

 private:
  std::array<std::int64_t, kCapacity> widths_{};
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::optional<std::int64_t> last_edge_;
};

/// One magneto-resistive wheel-speed channel: encoder, capture buffer and the
/// adaptive moving average. `gain` models a sensor fault (1 = healthy).
class WssChannel {
 public:
  explicit WssChannel(EncoderConfig enc = {}, SensingParams p = {}) : gen_(enc), p_(p) {}

  void advance(double v_mps, double dt_s) {
    edges_.clear();
    gen_.advance(v_mps * gain_, dt_s, edges_);
    for (auto e : edges_) buf_.push_edge(e);
    now_s_ += dt_s;
  }

  SpeedReading measure() {
    const auto& enc = gen_.config();
    const auto last = buf_.last_edge();
    if (!last || buf_.size() == 0 ||
        now_s_ - static_cast<double>(*last) / enc.sample_clock_hz > p_.staleness_s) {
      last_kmh_ = 0.0;
      return {SpeedReading::Status::Stale, 0.0};
    }
    const int window = adaptive_window(last_kmh_, p_);
    const auto widths = buf_.newest(static_cast<std::size_t>(window), enc.sample_clock_hz);
    last_kmh_ = wss_velocity(widths, enc);
    return {SpeedReading::Status::Ok, last_kmh_};
  }

  void set_gain(double g) { gain_ = g; }
  double gain() const { return gain_; }

 private:
  PulseGenerator gen_;
  SensingParams p_;
  PulseBuffer buf_;
  std::vector<std::int64_t> edges_;
  double now_s_ = 0.0;
  double last_kmh_ = 0.0;
  double gain_ = 1.0;
};

/// Mismatch threshold for the redundant channels. Symmetric in its arguments.
inline bool channels_disagree(double v_a, double v_b, const SensingParams& p = {}) {
  const double mean = 0.5 * (v_a + v_b);
  return std::abs(v_a - v_b) > std::max(p.plausibility_abs_kmh, p.plausibility_rel * std::abs(mean));
}

enum class Plausibility { Ok, WssInaccuracy };

/// Flags WSS inaccuracy once the channels disagree for longer than the
/// persistence time.
class PlausibilityMonitor {
 public:
  explicit PlausibilityMonitor(SensingParams p = {}) : p_(p) {}

  Plausibility update(double v_a, double v_b, double dt_s) {
    mismatch_s_ = channels_disagree(v_a, v_b, p_) ? mismatch_s_ + dt_s : 0.0;
    return mismatch_s_ > p_.plausibility_persist_s + 1e-9 ? Plausibility::WssInaccuracy : Plausibility::Ok;
  }

 private:
  SensingParams p_;
  double mismatch_s_ = 0.0;
};

/// Passive inductive sensor on the clutch bell; below the comparator threshold
/// the reading is invalid. The validity switch is hysteretic.
class TssSensor {
 public:
  explicit TssSensor(SensingParams p = {}) : p_(p) {}

  SpeedReading measure(double v_rear_kmh) {
    if (valid_ && v_rear_kmh < p_.tss_min_kmh - p_.tss_hysteresis_kmh) valid_ = false;
    if (!valid_ && v_rear_kmh >= p_.tss_min_kmh + p_.tss_hysteresis_kmh) valid_ = true;
    if (!valid_) return {SpeedReading::Status::LowSpeedInvalid, 0.0};
    return {SpeedReading::Status::Ok, v_rear_kmh};
  }

 private:
  SensingParams p_;
  bool valid_ = false;
};

enum class SlipState { None, Slip, Lock };

inline const char* to_string(SlipState s) {
  switch (s) {
    case SlipState::Slip: return "SLIP";
    case SlipState::Lock: return "LOCK";
    default: return "NONE";
  }
}

class SlipDetector {
 public:
  explicit SlipDetector(SensingParams p = {}) : p_(p) {}

  SlipState update(double v_front_kmh, double v_rear_kmh, double dt_s) {
    SlipState raw = SlipState::None;
    if (v_rear_kmh - v_front_kmh > p_.slip_band_kmh)
      raw = SlipState::Slip;
    else if (v_front_kmh - v_rear_kmh > p_.slip_band_kmh)
      raw = SlipState::Lock;
    held_s_ = (raw == candidate_ && raw != SlipState::None) ? held_s_ + dt_s : (raw == SlipState::None ? 0.0 : dt_s);
    candidate_ = raw;
    return held_s_ > p_.slip_persist_s + 1e-9 ? raw : SlipState::None;
  }

 private:
  SensingParams p_;
  SlipState candidate_ = SlipState::None;
  double held_s_ = 0.0;
};

/// Emulated TSS frequency fed to the engine controller. Implemented literally.
inline double emulation_frequency(double v_kmh, const EmulationConfig& emu = {}, const EncoderConfig& enc = {}) {
  return kmh_to_mps(v_kmh) * (2.0 * emu.gear_ratio * emu.pole_count) / enc.wheel_circumference_m;
}

}  // namespace vcsim::sensing
