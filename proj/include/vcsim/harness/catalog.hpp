#pragma once

// Machine-readable interface documents: the bus signal catalog and the JSON
// schema of the live stream. `vcsim catalog` writes both into docs/.

#include <cstdio>
#include <string>

#include "json.hpp"
#include "vcsim/bus.hpp"
#include "vcsim/harness/scenario.hpp"
#include "vcsim/harness/simulator.hpp"
#include "vcsim/mecu.hpp"

namespace vcsim::harness {

inline std::string hex_id(std::uint16_t id) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%03X", id);
  return buf;
}

inline nlohmann::json bus_catalog_json() {
  using nlohmann::json;
  json frames = json::array();
  for (const auto& f : bus::kFrames) {
    json signals = json::array();
    for (const auto& s : bus::kSignals) {
      if (s.frame_id != f.id) continue;
      signals.push_back({{"name", std::string(s.name)},
                         {"unit", std::string(s.unit)},
                         {"start_byte", s.start_byte},
                         {"length_bytes", s.length},
                         {"signed", s.is_signed},
                         {"scale", 1.0 / s.resolution_den},
                         {"raw_per_unit", s.resolution_den},
                         {"min", s.min},
                         {"max", s.max}});
    }
    frames.push_back({{"id", hex_id(f.id)}, {"name", std::string(f.name)}, {"dlc", f.dlc}, {"signals", signals}});
  }
  return {{"byte_order", "little_endian"},
          {"physical_value", "raw * scale"},
          {"counter", "4-bit rolling per frame id"},
          {"checksum", "XOR of the dlc payload bytes"},
          {"frames", frames}};
}

namespace detail {

inline nlohmann::json enum_of(std::initializer_list<std::string> values) {
  return {{"type", "string"}, {"enum", values}};
}

inline nlohmann::json error_id_enum() {
  nlohmann::json e = nlohmann::json::array();
  for (auto id : mecu::kAllErrors) e.push_back(mecu::to_string(id));
  return {{"type", "string"}, {"enum", e}};
}

inline nlohmann::json command_schema(const std::string& type, nlohmann::json props,
                                     std::vector<std::string> required) {
  props["type"] = {{"const", type}};
  required.insert(required.begin(), "type");
  return {{"type", "object"}, {"properties", props}, {"required", required}, {"additionalProperties", false}};
}

}  // namespace detail

inline nlohmann::json stream_schema_json() {
  using nlohmann::json;
  const json num = {{"type", "number"}};
  const json unit = {{"type", "number"}, {"minimum", 0}, {"maximum", 1}};
  const json opt_num = {{"type", {"number", "null"}}};

  json frame_props = {
      {"type", {{"const", "frame"}}},
      {"t", num},
      {"grip", unit},
      {"v_set", num},
      {"v_meas", num},
      {"v_true", num},
      {"distance", num},
      {"tva_cmd", num},
      {"tva_actual", num},
      {"ignition_deg", num},
      {"engine_rpm", num},
      {"injection_rate", num},
      {"fuel_total", num},
      {"grade", num},
      {"pitch", num},
      {"mode", detail::enum_of({"ORIGINAL", "VC"})},
      {"failsafe_class", {{"type", "integer"}, {"minimum", 0}, {"maximum", 4}}},
      {"failsafe_errors", {{"type", "array"}, {"items", detail::error_id_enum()}}},
      {"failsafe_actions",
       {{"type", "array"},
        {"items", detail::enum_of({mecu::to_string(mecu::Action::HmiNotification),
                                   mecu::to_string(mecu::Action::DisableCruise),
                                   mecu::to_string(mecu::Action::ResetTvaSetVelocity),
                                   mecu::to_string(mecu::Action::EngineShutDown)})}}},
      {"engine_running", {{"type", "boolean"}}},
      {"cruise_state", detail::enum_of({"OFF", "ON", "UNAVAILABLE"})},
      {"cruise_target", opt_num},
      {"recording", {{"type", "boolean"}}},
      {"eco_score", {{"type", "number"}, {"minimum", 0}, {"maximum", 100}}},
      {"consumption_l_per_100km", opt_num},
  };
  json frame_required = json::array();
  for (const auto& [k, _] : frame_props.items()) frame_required.push_back(k);

  const json commands = json::array({
      detail::command_schema("grip", {{"value", unit}}, {"value"}),
      detail::command_schema("brake", {{"value", unit}}, {"value"}),
      detail::command_schema("cruise", {{"command", detail::enum_of({"SET", "RESUME", "CANCEL", "PLUS", "MINUS"})}},
                             {"command"}),
      detail::command_schema("mode", {{"value", detail::enum_of({"ORIGINAL", "VC"})}}, {"value"}),
      detail::command_schema("record", {{"value", {{"type", "boolean"}}}}, {"value"}),
      detail::command_schema("fault", {{"id", detail::error_id_enum()}, {"active", {{"type", "boolean"}}}},
                             {"id", "active"}),
      detail::command_schema("silence", {{"node", detail::enum_of({"TPS", "TVA", "HMI"})}, {"value", {{"type", "boolean"}}}},
                             {"node", "value"}),
      detail::command_schema("wss_gain",
                             {{"channel", {{"type", "integer"}, {"enum", {0, 1}}}},
                              {"value", {{"type", "number"}, {"exclusiveMinimum", 0}}}},
                             {"channel", "value"}),
      detail::command_schema("reset", json::object(), {}),
  });

  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "vcsim live stream"},
          {"description",
           "Newline-delimited JSON over TCP. The server sends one frame per control tick; the client sends commands, "
           "which apply on the next tick. Malformed commands are answered with an error message."},
          {"$defs",
           {{"frame",
             {{"type", "object"},
              {"properties", frame_props},
              {"required", frame_required},
              {"additionalProperties", false}}},
            {"error",
             {{"type", "object"},
              {"properties", {{"type", {{"const", "error"}}}, {"message", {{"type", "string"}}}}},
              {"required", {"type", "message"}},
              {"additionalProperties", false}}},
            {"command", {{"oneOf", commands}}}}},
          {"oneOf",
           {{{"$ref", "#/$defs/frame"}}, {{"$ref", "#/$defs/error"}}, {{"$ref", "#/$defs/command"}}}}};
}

}  // namespace vcsim::harness
