#pragma once

// Virtual CAN: signal catalog, frame packing and receive-side validation.
// Signals are little-endian integers; physical = raw / resolution_den + offset.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcsim/common.hpp"

namespace vcsim::bus {

struct SignalSpec {
  std::string_view name;
  std::string_view unit;
  std::uint16_t frame_id;
  std::uint8_t start_byte;
  std::uint8_t length;  // bytes, 1 or 2
  bool is_signed;
  std::int32_t resolution_den;  // raw counts per physical unit
  double min;
  double max;
};

struct FrameSpec {
  std::uint16_t id;
  std::string_view name;
  std::uint8_t dlc;
};

inline constexpr std::array<FrameSpec, 8> kFrames{{
    {0x101, "TPS_STATUS", 3},
    {0x102, "TVA_STATUS", 3},
    {0x110, "WSS_SPEED", 4},
    {0x111, "TSS_SPEED", 3},
    {0x120, "VC_CONTROL", 6},
    {0x130, "HMI_COMMAND", 3},
    {0x140, "ENGINE", 6},
    {0x150, "FAILSAFE", 4},
}};

inline constexpr std::array<SignalSpec, 19> kSignals{{
    {"grip", "%", 0x101, 0, 2, false, 100, 0.0, 100.0},
    {"tps_calibrated", "bool", 0x101, 2, 1, false, 1, 0.0, 1.0},
    {"tva_actual", "%", 0x102, 0, 2, false, 100, 0.0, 100.0},
    {"tva_calibrated", "bool", 0x102, 2, 1, false, 1, 0.0, 1.0},
    {"v_wss_a", "km/h", 0x110, 0, 2, false, 100, 0.0, 300.0},
    {"v_wss_b", "km/h", 0x110, 2, 2, false, 100, 0.0, 300.0},
    {"v_tss", "km/h", 0x111, 0, 2, false, 100, 0.0, 300.0},
    {"tss_valid", "bool", 0x111, 2, 1, false, 1, 0.0, 1.0},
    {"v_set", "km/h", 0x120, 0, 2, false, 100, 0.0, 300.0},
    {"v_meas", "km/h", 0x120, 2, 2, false, 100, 0.0, 300.0},
    {"tva_cmd", "%", 0x120, 4, 2, false, 100, 0.0, 100.0},
    {"mode", "enum", 0x130, 0, 1, false, 1, 0.0, 1.0},
    {"cruise_cmd", "enum", 0x130, 1, 1, false, 1, 0.0, 5.0},
    {"recording", "bool", 0x130, 2, 1, false, 1, 0.0, 1.0},
    {"engine_rpm", "1/min", 0x140, 0, 2, false, 1, 0.0, 65535.0},
    {"injection_rate", "ml/s", 0x140, 2, 2, false, 10000, 0.0, 6.5535},
    {"ignition_deg", "deg BTDC", 0x140, 4, 2, true, 100, -45.0, 45.0},
    {"failsafe_mask", "bitmask", 0x150, 0, 2, false, 1, 0.0, 63.0},
    {"failsafe_class", "class", 0x150, 2, 2, false, 1, 0.0, 4.0},
}};

inline const FrameSpec* find_frame(std::uint16_t id) {
  for (const auto& f : kFrames)
    if (f.id == id) return &f;
  return nullptr;
}

inline const SignalSpec* find_signal(std::string_view name) {
  for (const auto& s : kSignals)
    if (s.name == name) return &s;
  return nullptr;
}

using SignalSet = std::map<std::string, double>;

struct BusFrame {
  std::uint16_t id = 0;  // 11-bit
  std::uint8_t dlc = 0;
  std::array<std::uint8_t, 8> payload{};
  double timestamp_s = 0.0;
  std::uint8_t counter = 0;  // 4-bit rolling
  std::uint8_t checksum = 0;

  std::span<const std::uint8_t> data() const { return {payload.data(), dlc}; }
};

inline std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes) {
  std::uint8_t c = 0;
  for (auto b : bytes) c ^= b;
  return c;
}

namespace detail {

inline void pack(BusFrame& f, const SignalSpec& s, double value) {
  if (!(value >= s.min && value <= s.max))
    throw Error("SIGNAL_RANGE", std::string(s.name) + " out of range: " + std::to_string(value));
  const long long raw = std::llround(value * s.resolution_den);
  const auto u = static_cast<std::uint64_t>(raw);
  for (std::uint8_t i = 0; i < s.length; ++i) f.payload[s.start_byte + i] = static_cast<std::uint8_t>((u >> (8 * i)) & 0xFF);
}

inline double unpack(const BusFrame& f, const SignalSpec& s) {
  std::uint64_t u = 0;
  for (std::uint8_t i = 0; i < s.length; ++i) u |= static_cast<std::uint64_t>(f.payload[s.start_byte + i]) << (8 * i);
  long long raw = static_cast<long long>(u);
  if (s.is_signed) {
    const unsigned bits = 8u * s.length;
    if (u & (1ull << (bits - 1))) raw -= (1ll << bits);
  }
  return static_cast<double>(raw) / s.resolution_den;
}

}  // namespace detail

/// Sender side: owns one rolling counter per frame id.
class Encoder {
 public:
  /// Packs every catalog signal of `id`; missing signals encode as their minimum.
  BusFrame encode(std::uint16_t id, const SignalSet& signals, double timestamp_s) {
    const FrameSpec* fs = find_frame(id);
    if (!fs) throw Error("UNKNOWN_FRAME", "frame id " + std::to_string(id) + " not in catalog");
    BusFrame f;
    f.id = id;
    f.dlc = fs->dlc;
    f.timestamp_s = timestamp_s;
    for (const auto& s : kSignals) {
      if (s.frame_id != id) continue;
      const auto it = signals.find(std::string(s.name));
      detail::pack(f, s, it == signals.end() ? s.min : it->second);
    }
    for (const auto& [name, _] : signals) {
      const SignalSpec* s = find_signal(name);
      if (!s || s->frame_id != id) throw Error("SIGNAL_RANGE", "signal '" + name + "' does not belong to frame");
    }
    auto& c = counters_[id];
    f.counter = c;
    c = static_cast<std::uint8_t>((c + 1) & 0x0F);
    f.checksum = xor_checksum(f.data());
    return f;
  }

 private:
  std::map<std::uint16_t, std::uint8_t> counters_;
};

enum class DecodeStatus { Ok, ChecksumFail, CounterSkip, UnknownFrame };

inline const char* to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Ok: return "OK";
    case DecodeStatus::ChecksumFail: return "CHECKSUM_FAIL";
    case DecodeStatus::CounterSkip: return "COUNTER_SKIP";
    case DecodeStatus::UnknownFrame: return "UNKNOWN_FRAME";
  }
  return "?";
}

struct Decoded {
  DecodeStatus status = DecodeStatus::Ok;
  SignalSet signals;
};

/// Receiver side: validates checksum and counter continuity per frame id.
/// Signals are still unpacked on a counter skip (the payload itself is intact).
class Decoder {
 public:
  Decoded decode(const BusFrame& f) {
    Decoded d;
    if (!find_frame(f.id)) {
      d.status = DecodeStatus::UnknownFrame;
      return d;
    }
    if (xor_checksum(f.data()) != f.checksum) {
      d.status = DecodeStatus::ChecksumFail;
      return d;
    }
    const auto it = last_counter_.find(f.id);
    if (it != last_counter_.end() && f.counter != ((it->second + 1) & 0x0F)) d.status = DecodeStatus::CounterSkip;
    last_counter_[f.id] = f.counter;
    for (const auto& s : kSignals)
      if (s.frame_id == f.id) d.signals[std::string(s.name)] = detail::unpack(f, s);
    return d;
  }

 private:
  std::map<std::uint16_t, std::uint8_t> last_counter_;
};

}  // namespace vcsim::bus
