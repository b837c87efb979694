#pragma once

// Main ECU supervisor: fail-safe classes and actions, node life detection and
// the routing switch between the original TSS and the emulated signal.

#include <array>
#include <bitset>
#include <cstdint>
#include <string>
#include <vector>

#include "vcsim/common.hpp"
#include "vcsim/powertrain.hpp"
#include "vcsim/sensing.hpp"

namespace vcsim::mecu {

enum class ErrorId : std::uint8_t {
  TpsCalibReq = 1,
  TvaCalibReq = 2,
  HmiCanError = 3,
  WssInaccuracy = 4,
  TpsError = 5,
  TvaError = 6,
};

inline constexpr std::array<ErrorId, 6> kAllErrors{ErrorId::TpsCalibReq,   ErrorId::TvaCalibReq, ErrorId::HmiCanError,
                                                   ErrorId::WssInaccuracy, ErrorId::TpsError,    ErrorId::TvaError};

enum class Action : std::uint8_t { HmiNotification, DisableCruise, ResetTvaSetVelocity, EngineShutDown };

inline int error_class(ErrorId id) {
  switch (id) {
    case ErrorId::TpsCalibReq:
    case ErrorId::TvaCalibReq: return 1;
    case ErrorId::HmiCanError: return 2;
    case ErrorId::WssInaccuracy:
    case ErrorId::TpsError: return 3;
    case ErrorId::TvaError: return 4;
  }
  return 0;
}

inline Action class_action(int cls) {
  switch (cls) {
    case 1: return Action::HmiNotification;
    case 2: return Action::DisableCruise;
    case 3: return Action::ResetTvaSetVelocity;
    default: return Action::EngineShutDown;
  }
}

inline const char* to_string(ErrorId id) {
  switch (id) {
    case ErrorId::TpsCalibReq: return "TPS_CALIB_REQ";
    case ErrorId::TvaCalibReq: return "TVA_CALIB_REQ";
    case ErrorId::HmiCanError: return "HMI_CAN_ERROR";
    case ErrorId::WssInaccuracy: return "WSS_INACCURACY";
    case ErrorId::TpsError: return "TPS_ERROR";
    case ErrorId::TvaError: return "TVA_ERROR";
  }
  return "?";
}

inline const char* to_string(Action a) {
  switch (a) {
    case Action::HmiNotification: return "HMI notification";
    case Action::DisableCruise: return "Disable cruise contr.";
    case Action::ResetTvaSetVelocity: return "Reset TVA & set vel.";
    case Action::EngineShutDown: return "Engine shut down";
  }
  return "?";
}

inline ErrorId error_from_string(const std::string& s) {
  for (ErrorId id : kAllErrors)
    if (s == to_string(id)) return id;
  throw Error("INVALID_ARGUMENT", "unknown error id '" + s + "'");
}

/// Bit i-1 set <=> error ID i active.
class ErrorSet {
 public:
  ErrorSet() = default;
  explicit ErrorSet(std::uint8_t mask) : bits_(mask & 0x3F) {}
  ErrorSet(std::initializer_list<ErrorId> ids) {
    for (ErrorId id : ids) insert(id);
  }

  void insert(ErrorId id) { bits_.set(static_cast<std::size_t>(id) - 1); }
  void erase(ErrorId id) { bits_.reset(static_cast<std::size_t>(id) - 1); }
  bool contains(ErrorId id) const { return bits_.test(static_cast<std::size_t>(id) - 1); }
  bool empty() const { return bits_.none(); }
  std::uint8_t mask() const { return static_cast<std::uint8_t>(bits_.to_ulong()); }

  ErrorSet operator|(const ErrorSet& o) const { return ErrorSet(static_cast<std::uint8_t>(mask() | o.mask())); }
  bool operator==(const ErrorSet& o) const { return bits_ == o.bits_; }

  int highest_class() const {
    int c = 0;
    for (ErrorId id : kAllErrors)
      if (contains(id)) c = std::max(c, error_class(id));
    return c;
  }

  std::vector<ErrorId> ids() const {
    std::vector<ErrorId> out;
    for (ErrorId id : kAllErrors)
      if (contains(id)) out.push_back(id);
    return out;
  }

 private:
  std::bitset<6> bits_;
};

enum class Relay { Closed, Open };
enum class TvaOverride { None, Reset };

struct FailSafeStatus {
  ErrorSet active;
  int highest_class = 0;
  Relay ignition_relay = Relay::Closed;
  bool cruise_allowed = true;
  TvaOverride tva_override = TvaOverride::None;
};

struct TransitionResult {
  FailSafeStatus status;
  std::vector<Action> actions;  // one per active class, ascending
};

/// Strict class dominance for the status flags, union of actions over all
/// active errors. A class-4 shutdown latches until operator_reset().
inline TransitionResult transition(const FailSafeStatus& prev, const ErrorSet& errors) {
  TransitionResult r;
  r.status.active = errors;
  if (prev.ignition_relay == Relay::Open) r.status.active.insert(ErrorId::TvaError);
  const int hc = r.status.active.highest_class();
  r.status.highest_class = hc;
  r.status.ignition_relay = hc >= 4 ? Relay::Open : Relay::Closed;
  r.status.cruise_allowed = hc < 2;
  r.status.tva_override = hc == 3 ? TvaOverride::Reset : TvaOverride::None;
  std::array<bool, 5> seen{};
  for (ErrorId id : r.status.active.ids()) seen[static_cast<std::size_t>(error_class(id))] = true;
  for (int c = 1; c <= 4; ++c)
    if (seen[static_cast<std::size_t>(c)]) r.actions.push_back(class_action(c));
  return r;
}

/// Explicit operator reset: the only way to close a latched relay.
inline FailSafeStatus operator_reset(const FailSafeStatus& s) {
  FailSafeStatus out = s;
  out.active.erase(ErrorId::TvaError);
  out.ignition_relay = Relay::Closed;
  return transition(FailSafeStatus{}, out.active).status;
}

enum class Node : std::uint8_t { Tps, Tva, Hmi };
inline constexpr std::size_t kNodeCount = 3;

/// Life detection per bus node.
class HeartbeatMonitor {
 public:
  explicit HeartbeatMonitor(double timeout_s = 0.200) : timeout_s_(timeout_s) { last_seen_.fill(0.0); }

  void seen(Node n, double now_s) { last_seen_[static_cast<std::size_t>(n)] = now_s; }

  bool alive(Node n, double now_s) const { return now_s - last_seen_[static_cast<std::size_t>(n)] <= timeout_s_ + 1e-9; }

  std::array<bool, kNodeCount> alive_all(double now_s) const {
    return {alive(Node::Tps, now_s), alive(Node::Tva, now_s), alive(Node::Hmi, now_s)};
  }

  double timeout_s() const { return timeout_s_; }

 private:
  double timeout_s_;
  std::array<double, kNodeCount> last_seen_{};
};

/// Per-tick health snapshot gathered from the subsystems.
struct HealthReport {
  bool tps_calibrated = true;
  bool tva_calibrated = true;
  bool tps_alive = true;
  bool tva_alive = true;
  bool hmi_alive = true;
  bool wss_plausible = true;
  bool tps_plausible = true;  // redundant grip tracks agree
  bool tva_position_ok = true;
  int tps_comm_errors = 0;  // consecutive bad frames
  int tva_comm_errors = 0;
  int hmi_comm_errors = 0;
  ErrorSet injected;  // forced by the test bench
};

inline constexpr int kCommErrorLimit = 3;

inline ErrorSet evaluate(const HealthReport& h) {
  ErrorSet e = h.injected;
  if (!h.tps_calibrated) e.insert(ErrorId::TpsCalibReq);
  if (!h.tva_calibrated) e.insert(ErrorId::TvaCalibReq);
  if (!h.hmi_alive || h.hmi_comm_errors >= kCommErrorLimit) e.insert(ErrorId::HmiCanError);
  if (!h.wss_plausible) e.insert(ErrorId::WssInaccuracy);
  if (!h.tps_alive || !h.tps_plausible || h.tps_comm_errors >= kCommErrorLimit) e.insert(ErrorId::TpsError);
  if (!h.tva_alive || !h.tva_position_ok || h.tva_comm_errors >= kCommErrorLimit) e.insert(ErrorId::TvaError);
  return e;
}

enum class EcSource { OriginalTss, Emulated };

/// What the factory engine controller receives and how it times the spark.
struct EcInput {
  EcSource source = EcSource::OriginalTss;
  double perceived_kmh = 0.0;
  double signal_hz = 0.0;
  double ignition_deg = 0.0;
};

/// ORIGINAL forwards the real TSS reading, so the factory limiter retards the
/// spark near its limit. VC feeds the emulated signal at half the TSS rate,
/// capped below the limiter band so the spark stays at its optimum.
inline EcInput route_restriction(Mode mode, double v_kmh, const sensing::SpeedReading& tss,
                                 const powertrain::PowertrainParams& pp, const sensing::EmulationConfig& emu = {},
                                 const sensing::EncoderConfig& enc = {}) {
  EcInput in;
  if (mode == Mode::Original) {
    in.source = EcSource::OriginalTss;
    in.perceived_kmh = tss.ok() ? tss.kmh : 0.0;
    in.signal_hz = 2.0 * sensing::emulation_frequency(in.perceived_kmh, emu, enc);
  } else {
    in.source = EcSource::Emulated;
    const double ceiling = pp.v_limit_original_kmh - pp.restriction_band_kmh;
    in.perceived_kmh = std::min(0.5 * std::max(0.0, v_kmh), ceiling);
    in.signal_hz = sensing::emulation_frequency(std::max(0.0, v_kmh), emu, enc);
  }
  in.ignition_deg = powertrain::ec_original_restriction(in.perceived_kmh, pp);
  return in;
}

}  // namespace vcsim::mecu
