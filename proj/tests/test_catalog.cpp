#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "vcsim/harness/catalog.hpp"
#include "vcsim/harness/csv.hpp"
#include "vcsim/harness/stream.hpp"

using namespace vcsim;
using namespace vcsim::harness;
using nlohmann::json;
using vcsim::testing::schema_errors;
using vcsim::testing::source_path;

TEST(Docs, BusCatalogIsCurrent) {
  EXPECT_EQ(read_json_file(source_path("docs/bus_catalog.json")), bus_catalog_json())
      << "regenerate with: vcsim catalog --out docs";
}

TEST(Docs, StreamSchemaIsCurrent) {
  EXPECT_EQ(read_json_file(source_path("docs/stream_schema.json")), stream_schema_json())
      << "regenerate with: vcsim catalog --out docs";
}

TEST(BusCatalog, ListsEveryFrameAndSignal) {
  const auto c = bus_catalog_json();
  ASSERT_EQ(c.at("frames").size(), bus::kFrames.size());
  std::size_t signals = 0;
  std::set<std::string> ids;
  for (const auto& f : c.at("frames")) {
    ids.insert(f.at("id").get<std::string>());
    signals += f.at("signals").size();
    for (const auto& s : f.at("signals")) {
      EXPECT_LE(s.at("start_byte").get<int>() + s.at("length_bytes").get<int>(), f.at("dlc").get<int>());
      EXPECT_DOUBLE_EQ(s.at("scale").get<double>() * s.at("raw_per_unit").get<double>(), 1.0);
    }
  }
  EXPECT_EQ(signals, bus::kSignals.size());
  EXPECT_EQ(ids.size(), bus::kFrames.size());
  EXPECT_TRUE(ids.count("0x120"));
}

TEST(BusCatalog, CsvUnitsAgreeWithCatalog) {
  const auto c = bus_catalog_json();
  std::map<std::string, std::string> unit;
  for (const auto& f : c.at("frames"))
    for (const auto& s : f.at("signals")) unit[s.at("name")] = s.at("unit");
  const std::map<std::string, std::string> column_to_signal{{"v_set", "v_set"},
                                                           {"v_meas", "v_meas"},
                                                           {"tva_cmd", "tva_cmd"},
                                                           {"tva_actual", "tva_actual"},
                                                           {"ignition", "ignition_deg"},
                                                           {"engine_rpm", "engine_rpm"},
                                                           {"injection_rate", "injection_rate"}};
  for (const auto& col : csv_columns()) {
    const auto it = column_to_signal.find(std::string(col.name));
    if (it == column_to_signal.end()) continue;
    EXPECT_EQ(std::string(col.unit), unit.at(it->second)) << col.name;
  }
  EXPECT_EQ(unit.at("v_wss_a"), "km/h");
}

TEST(StreamSchema, CommandCases) {
  const auto s = stream_schema_json();
  for (const char* ok : {R"({"type":"grip","value":0.3})", R"({"type":"cruise","command":"MINUS"})",
                         R"({"type":"mode","value":"ORIGINAL"})", R"({"type":"fault","id":"TVA_ERROR","active":false})",
                         R"({"type":"silence","node":"TPS","value":true})", R"({"type":"wss_gain","channel":0,"value":1.2})",
                         R"({"type":"reset"})", R"({"type":"record","value":true})", R"({"type":"brake","value":0})"}) {
    EXPECT_TRUE(schema_errors(s, json::parse(ok), "command").empty()) << ok;
    EXPECT_NO_THROW(harness::parse_command_message(ok)) << ok;
  }
  for (const char* bad : {R"({"type":"grip","value":1.5})", R"({"type":"grip"})", R"({"type":"cruise","command":"UP"})",
                          R"({"type":"reset","now":true})", R"({"type":"wss_gain","channel":0,"value":0})",
                          R"({"type":"fault","id":"FUEL_ERROR","active":true})", R"({"type":"teleport"})"}) {
    EXPECT_FALSE(schema_errors(s, json::parse(bad), "command").empty()) << bad;
    EXPECT_THROW(harness::parse_command_message(bad), Error) << bad;
  }
}

TEST(StreamSchema, TopLevelAcceptsExactlyOneKind) {
  const auto s = stream_schema_json();
  EXPECT_TRUE(schema_errors(s, json::parse(R"({"type":"error","message":"x"})")).empty());
  EXPECT_TRUE(schema_errors(s, json::parse(R"({"type":"grip","value":1})")).empty());
  EXPECT_FALSE(schema_errors(s, json::parse(R"({"type":"frame"})")).empty());
  EXPECT_FALSE(schema_errors(s, json::parse(R"({"type":"hello"})")).empty());
}

TEST(StreamSchema, DraftAndDefinitions) {
  const auto s = stream_schema_json();
  EXPECT_EQ(s.at("$schema"), "https://json-schema.org/draft/2020-12/schema");
  for (const char* d : {"frame", "error", "command"}) EXPECT_TRUE(s.at("$defs").contains(d)) << d;
  EXPECT_EQ(s.at("$defs").at("command").at("oneOf").size(), 9u);
}
