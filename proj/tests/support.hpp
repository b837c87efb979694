#pragma once

// Test helpers: a seeded value generator for property tests, a small JSON
// schema checker covering the keywords the published schemas use, and paths
// into the source tree.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace vcsim::testing {

inline std::string source_path(const std::string& rel) { return std::string(VCSIM_SOURCE_DIR) + "/" + rel; }

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

/// Runs `body` on `cases` generators derived from `seed`. The failing case
/// index is reported through the gtest trace at the call site.
inline void for_all(int cases, std::uint64_t seed, const std::function<void(Gen&, int)>& body) {
  Gen master(seed);
  for (int i = 0; i < cases; ++i) {
    Gen g(master.bits());
    body(g, i);
  }
}

// ---- schema checking -----------------------------------------------------------

namespace detail {

inline bool type_matches(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()));
  return false;
}

inline void check(const nlohmann::json& root, const nlohmann::json& s, const nlohmann::json& v, const std::string& path,
                  std::vector<std::string>& errors) {
  if (s.contains("$ref")) {
    const auto ref = s.at("$ref").get<std::string>();
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) {
      errors.push_back(path + ": unsupported $ref " + ref);
      return;
    }
    check(root, root.at("$defs").at(ref.substr(prefix.size())), v, path, errors);
    return;
  }
  if (s.contains("oneOf")) {
    int matches = 0;
    for (const auto& alt : s.at("oneOf")) {
      std::vector<std::string> sub;
      check(root, alt, v, path, sub);
      if (sub.empty()) ++matches;
    }
    if (matches != 1) errors.push_back(path + ": matches " + std::to_string(matches) + " alternatives of oneOf");
  }
  if (s.contains("const") && v != s.at("const")) errors.push_back(path + ": expected const " + s.at("const").dump());
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s.at("enum")) found = found || e == v;
    if (!found) errors.push_back(path + ": value " + v.dump() + " not in enum");
  }
  if (s.contains("type")) {
    const auto& t = s.at("type");
    bool ok = false;
    if (t.is_string())
      ok = type_matches(v, t.get<std::string>());
    else
      for (const auto& alt : t) ok = ok || type_matches(v, alt.get<std::string>());
    if (!ok) {
      errors.push_back(path + ": wrong type, expected " + t.dump());
      return;
    }
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s.at("minimum").get<double>()) errors.push_back(path + ": below minimum");
    if (s.contains("maximum") && x > s.at("maximum").get<double>()) errors.push_back(path + ": above maximum");
    if (s.contains("exclusiveMinimum") && x <= s.at("exclusiveMinimum").get<double>())
      errors.push_back(path + ": not above exclusiveMinimum");
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& k : s.at("required"))
        if (!v.contains(k.get<std::string>())) errors.push_back(path + ": missing " + k.get<std::string>());
    const auto props = s.value("properties", nlohmann::json::object());
    for (const auto& [k, sub] : v.items()) {
      if (props.contains(k))
        check(root, props.at(k), sub, path + "." + k, errors);
      else if (s.contains("additionalProperties") && s.at("additionalProperties") == false)
        errors.push_back(path + ": unexpected field " + k);
    }
  }
  if (v.is_array() && s.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i)
      check(root, s.at("items"), v[i], path + "[" + std::to_string(i) + "]", errors);
}

}  // namespace detail

/// Returns the list of violations (empty = valid). `def` selects a $defs entry.
inline std::vector<std::string> schema_errors(const nlohmann::json& schema, const nlohmann::json& value,
                                              const std::string& def = "") {
  std::vector<std::string> errors;
  const auto& s = def.empty() ? schema : schema.at("$defs").at(def);
  detail::check(schema, s, value, "$", errors);
  return errors;
}

}  // namespace vcsim::testing
