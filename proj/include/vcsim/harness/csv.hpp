#pragma once

// Measurement-box CSV: one metadata comment line, a header with units, one
// row per control tick. Numbers use fixed 6-decimal formatting; golden files
// use round-trip precision instead.

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vcsim/bus.hpp"
#include "vcsim/harness/simulator.hpp"

namespace vcsim::harness {

struct Column {
  std::string_view name;
  std::string_view unit;
};

namespace detail {

// Units of bus-carried channels come from the signal catalog.
inline std::string_view catalog_unit(std::string_view signal) {
  const auto* s = bus::find_signal(signal);
  return s ? s->unit : std::string_view{};
}

}  // namespace detail

inline const std::vector<Column>& csv_columns() {
  static const std::vector<Column> cols{
      {"t", "s"},
      {"grip", "-"},
      {"v_set", detail::catalog_unit("v_set")},
      {"v_meas", detail::catalog_unit("v_meas")},
      {"v_true", "km/h"},
      {"distance", "m"},
      {"tva_cmd", detail::catalog_unit("tva_cmd")},
      {"tva_actual", detail::catalog_unit("tva_actual")},
      {"ignition", detail::catalog_unit("ignition_deg")},
      {"engine_rpm", detail::catalog_unit("engine_rpm")},
      {"injection_rate", detail::catalog_unit("injection_rate")},
      {"fuel_total", "ml"},
      {"grade", "-"},
      {"pitch", "deg"},
      {"mode", ""},
      {"failsafe_class", ""},
      {"cruise_state", ""},
  };
  return cols;
}

enum class Precision { Fixed6, RoundTrip };

inline std::string format_round_trip(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

/// RFC-4180 field quoting: only when the field needs it.
inline std::string csv_quote(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct LogMeta {
  std::string scenario;
  std::string mode;
  double dt_s = 0.001;
  double control_period_s = 0.020;
};

inline std::string header_line() {
  std::string h;
  for (const auto& c : csv_columns()) {
    if (!h.empty()) h += ',';
    std::string name(c.name);
    if (!c.unit.empty()) name += "[" + std::string(c.unit) + "]";
    h += csv_quote(name);
  }
  return h;
}

inline std::string csv_row(const MeasurementRecord& r, Precision prec = Precision::Fixed6) {
  auto num = prec == Precision::Fixed6 ? format_fixed : format_round_trip;
  const std::vector<std::string> f{num(r.t_s),
                                   num(r.grip),
                                   num(r.v_set_kmh),
                                   num(r.v_meas_kmh),
                                   num(r.v_true_kmh),
                                   num(r.x_m),
                                   num(r.tva_cmd_pct),
                                   num(r.tva_actual_pct),
                                   num(r.ignition_deg),
                                   num(r.engine_rpm),
                                   num(r.injection_mlps),
                                   num(r.fuel_ml),
                                   num(r.grade),
                                   num(r.pitch_deg),
                                   to_string(r.mode),
                                   std::to_string(r.failsafe_class),
                                   to_string(r.cruise)};
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) line += ',';
    line += csv_quote(f[i]);
  }
  return line;
}

inline void write_csv(std::ostream& out, const LogMeta& meta, const std::vector<MeasurementRecord>& recs,
                      Precision prec = Precision::Fixed6) {
  out << "# scenario=" << meta.scenario << " mode=" << meta.mode << " dt_s=" << format_fixed(meta.dt_s)
      << " control_period_s=" << format_fixed(meta.control_period_s) << "\n";
  out << header_line() << "\n";
  for (const auto& r : recs) out << csv_row(r, prec) << "\n";
}

inline void write_csv(const std::string& path, const LogMeta& meta, const std::vector<MeasurementRecord>& recs,
                      Precision prec = Precision::Fixed6) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IO_ERROR", "cannot open '" + path + "' for writing");
  write_csv(out, meta, recs, prec);
  out.flush();
  if (!out) throw Error("IO_ERROR", "write failed for '" + path + "'");
}

/// Splits one CSV line honoring RFC-4180 quotes.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

/// Whole-field decimal parse; accepts subnormals, which std::stod rejects.
inline double parse_double(const std::string& f) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || end != f.data() + f.size() || f.empty())
    throw std::invalid_argument("bad number '" + f + "'");
  return v;
}

inline int parse_int(const std::string& f) {
  int v = 0;
  const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || end != f.data() + f.size() || f.empty())
    throw std::invalid_argument("bad integer '" + f + "'");
  return v;
}

struct Log {
  LogMeta meta;
  std::vector<MeasurementRecord> records;
};

inline Log read_csv(std::istream& in, const std::string& origin = "<stream>") {
  Log log;
  std::string line;
  auto fail = [&](const std::string& msg) { throw Error("LOG_INVALID", origin + ": " + msg); };
  if (!std::getline(in, line)) fail("empty file");
  if (line.rfind("# ", 0) == 0) {
    std::istringstream meta(line.substr(2));
    std::string kv;
    while (meta >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const auto k = kv.substr(0, eq);
      const auto v = kv.substr(eq + 1);
      if (k == "scenario") log.meta.scenario = v;
      if (k == "mode") log.meta.mode = v;
      try {
        if (k == "dt_s") log.meta.dt_s = parse_double(v);
        if (k == "control_period_s") log.meta.control_period_s = parse_double(v);
      } catch (const std::exception& e) {
        fail(std::string("metadata: ") + e.what());
      }
    }
    if (!std::getline(in, line)) fail("missing header");
  }
  if (line != header_line()) fail("unexpected header");
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != csv_columns().size()) fail("line " + std::to_string(lineno) + ": wrong field count");
    try {
      MeasurementRecord r;
      std::size_t i = 0;
      r.t_s = parse_double(f[i++]);
      r.grip = parse_double(f[i++]);
      r.v_set_kmh = parse_double(f[i++]);
      r.v_meas_kmh = parse_double(f[i++]);
      r.v_true_kmh = parse_double(f[i++]);
      r.x_m = parse_double(f[i++]);
      r.tva_cmd_pct = parse_double(f[i++]);
      r.tva_actual_pct = parse_double(f[i++]);
      r.ignition_deg = parse_double(f[i++]);
      r.engine_rpm = parse_double(f[i++]);
      r.injection_mlps = parse_double(f[i++]);
      r.fuel_ml = parse_double(f[i++]);
      r.grade = parse_double(f[i++]);
      r.pitch_deg = parse_double(f[i++]);
      r.mode = mode_from_string(f[i++]);
      r.failsafe_class = parse_int(f[i++]);
      r.cruise = cruise_state_from_string(f[i++]);
      log.records.push_back(r);
    } catch (const std::exception& e) {
      fail("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

inline Log read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot open '" + path + "'");
  return read_csv(in, path);
}

}  // namespace vcsim::harness
