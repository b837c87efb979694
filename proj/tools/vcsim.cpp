// vcsim: scenario runner, log comparison, calibration and catalog export.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcsim/harness/calibrate.hpp"
#include "vcsim/harness/catalog.hpp"
#include "vcsim/harness/csv.hpp"
#include "vcsim/harness/report.hpp"
#include "vcsim/harness/scenario.hpp"
#include "vcsim/harness/simulator.hpp"
#include "vcsim/harness/stream.hpp"

namespace fs = std::filesystem;
using namespace vcsim;
using namespace vcsim::harness;

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted = true; }

int exit_code(const Error& e) {
  if (e.code() == "CONFIG_INVALID") return 2;
  if (e.code() == "IO_ERROR") return 3;
  if (e.code() == "LOG_INVALID" || e.code() == "SCENARIO_MISMATCH") return 4;
  return 1;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("IO_ERROR", "cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error("IO_ERROR", "write failed for '" + path.string() + "'");
}

/// "ID@t0" switches the fault on at t0; "ID@t0:t1" also clears it at t1.
std::vector<ScriptEvent> parse_fault_spec(const std::string& spec) {
  const auto at = spec.find('@');
  const std::string id_str = spec.substr(0, at);
  mecu::ErrorId id;
  try {
    id = mecu::error_from_string(id_str);
  } catch (const Error&) {
    throw Error("CONFIG_INVALID", "--fault: unknown error id '" + id_str + "'");
  }
  double t0 = 0.0;
  std::optional<double> t1;
  if (at != std::string::npos) {
    const std::string times = spec.substr(at + 1);
    const auto colon = times.find(':');
    try {
      t0 = std::stod(times.substr(0, colon));
      if (colon != std::string::npos) t1 = std::stod(times.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error("CONFIG_INVALID", "--fault: bad time in '" + spec + "'");
    }
  }
  if (t0 < 0.0 || (t1 && *t1 < t0)) throw Error("CONFIG_INVALID", "--fault: times must satisfy 0 <= t0 <= t1");
  std::vector<ScriptEvent> ev{{t0, FaultCmd{id, true}}};
  if (t1) ev.push_back({*t1, FaultCmd{id, false}});
  return ev;
}

void insert_events(ScenarioConfig& cfg, const std::vector<ScriptEvent>& events) {
  for (const auto& e : events) {
    auto pos = std::upper_bound(cfg.script.begin(), cfg.script.end(), e.t_s,
                                [](double t, const ScriptEvent& s) { return t < s.t_s; });
    cfg.script.insert(pos, e);
  }
}

ScenarioConfig load_config(const std::string& source, std::optional<std::uint64_t> seed,
                           const std::string& params_file, const std::vector<std::string>& faults) {
  nlohmann::json doc;
  const std::string prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0)
    doc = {{"builtin", source.substr(prefix.size())}};
  else
    doc = read_json_file(source);
  if (seed) doc["seed"] = *seed;
  ScenarioConfig cfg = parse_scenario(doc);
  if (!params_file.empty()) apply_params_file(cfg, read_json_file(params_file));
  for (const auto& f : faults) insert_events(cfg, parse_fault_spec(f));
  cfg.validate();
  return cfg;
}

struct RunOptions {
  std::string config;
  std::string mode;
  std::string out_dir;
  std::optional<int> serve_port;
  std::string params;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> faults;
  double realtime = 1.0;
  double session_duration = 0.0;
};

int cmd_run(const RunOptions& o) {
  ScenarioConfig cfg = load_config(o.config, o.seed, o.params, o.faults);
  if (!o.mode.empty()) {
    if (o.mode == "original")
      cfg.mode = ModeSelection::Original;
    else if (o.mode == "vc")
      cfg.mode = ModeSelection::VelocityControl;
    else
      cfg.mode = ModeSelection::Both;
  }
  if (!o.out_dir.empty()) fs::create_directories(o.out_dir);

  if (o.serve_port) {
    const Mode mode = cfg.mode == ModeSelection::Original ? Mode::Original : Mode::VelocityControl;
    Simulator sim(cfg, mode);
    StreamServer server(static_cast<std::uint16_t>(*o.serve_port));
    server.start();
    std::cerr << "serving " << cfg.name << " on 127.0.0.1:" << server.port() << " (Ctrl-C to stop)\n";
    std::signal(SIGINT, on_sigint);
    std::vector<MeasurementRecord> recorded;
    run_session(sim, server, {o.realtime, o.session_duration}, [] { return g_interrupted.load(); },
                [&](const MeasurementRecord& r) { recorded.push_back(r); });
    server.stop();
    if (!o.out_dir.empty() && !recorded.empty()) {
      const fs::path p = fs::path(o.out_dir) / (cfg.name + "_session.csv");
      write_csv(p.string(), {cfg.name, to_string(mode), cfg.dt_s, cfg.control_period_s}, recorded);
      std::cerr << "wrote " << p.string() << "\n";
    }
    std::cout << to_json(sim.summary()).dump(2) << "\n";
    return 0;
  }

  nlohmann::json out = nlohmann::json::object();
  out["scenario"] = cfg.name;
  out["runs"] = nlohmann::json::array();
  std::vector<Log> logs;
  for (Mode m : modes_of(cfg.mode)) {
    auto res = run(cfg, m);
    Log log{{cfg.name, to_string(m), cfg.dt_s, cfg.control_period_s}, std::move(res.records)};
    if (!o.out_dir.empty()) {
      const fs::path p = fs::path(o.out_dir) / (cfg.name + "_" + to_string(m) + ".csv");
      write_csv(p.string(), log.meta, log.records);
    }
    auto s = to_json(res.summary);
    s["eco_score"] = eco_score(log.records, cfg.params.eco_baseline_l_per_100km);
    out["runs"].push_back(s);
    logs.push_back(std::move(log));
  }
  if (logs.size() == 2) out["comparison"] = to_json(compare(logs[0], logs[1]));
  if (!o.out_dir.empty()) write_json(fs::path(o.out_dir) / (cfg.name + "_summary.json"), out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
  const auto rep = to_json(compare(read_csv(a), read_csv(b)));
  if (!out.empty()) write_json(out, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_calibrate(const std::string& params_file, const std::string& out, double scale, std::uint64_t seed) {
  ScenarioParams params;
  if (!params_file.empty()) detail::apply_params(read_json_file(params_file), params, "params");
  CalibrationTargets tgt;
  tgt.fuel_scale = scale;
  tgt.seed = seed;
  const auto rep = to_json(calibrate(params, tgt));
  if (!out.empty()) write_json(out, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_catalog(const std::string& dir) {
  fs::create_directories(dir);
  write_json(fs::path(dir) / "bus_catalog.json", bus_catalog_json());
  write_json(fs::path(dir) / "stream_schema.json", stream_schema_json());
  std::cout << "wrote " << (fs::path(dir) / "bus_catalog.json").string() << " and "
            << (fs::path(dir) / "stream_schema.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Velocity-control scooter simulator"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario (file path or builtin:<NAME>)");
  run_cmd->add_option("config", ro.config, "Scenario file, or builtin:S1|S2|S3|STEP_INCREMENTAL|STEP_INITIAL|FUEL_CYCLE")
      ->required();
  run_cmd->add_option("--mode", ro.mode, "Override the scenario mode")
      ->check(CLI::IsMember({"original", "vc", "both"}));
  run_cmd->add_option("--out", ro.out_dir, "Directory for CSV logs and the summary");
  run_cmd->add_option("--serve", ro.serve_port, "Serve an interactive session on this TCP port (0 = any)")
      ->check(CLI::Range(0, 65535));
  run_cmd->add_option("--params", ro.params, "Parameter override file");
  run_cmd->add_option("--seed", ro.seed, "Seed for generated routes");
  run_cmd->add_option("--fault", ro.faults, "Inject a fault: ID@t0[:t1], e.g. TPS_ERROR@5:10");
  run_cmd->add_option("--realtime", ro.realtime, "Interactive pacing factor (<= 0: as fast as possible)");
  run_cmd->add_option("--session-duration", ro.session_duration, "Stop the interactive session after this time [s]");

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmp_cmd = app.add_subcommand("compare", "Fuel comparison of two logs of the same scenario");
  cmp_cmd->add_option("a", cmp_a, "Reference log (usually ORIGINAL)")->required();
  cmp_cmd->add_option("b", cmp_b, "Compared log (usually VC)")->required();
  cmp_cmd->add_option("--out", cmp_out, "Write the report to this file");

  std::string cal_params, cal_out = "calibration_report.json";
  double cal_scale = 0.1;
  std::uint64_t cal_seed = 1;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit the fuel-model efficiencies and write a report");
  cal_cmd->add_option("--params", cal_params, "Parameter override file");
  cal_cmd->add_option("--out", cal_out, "Report path");
  cal_cmd->add_option("--fuel-scale", cal_scale, "Reference cycle length as a share of the full cycle");
  cal_cmd->add_option("--seed", cal_seed, "Reference cycle seed");

  std::string cat_dir = "docs";
  auto* cat_cmd = app.add_subcommand("catalog", "Write the bus catalog and stream schema");
  cat_cmd->add_option("--out", cat_dir, "Target directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(ro);
    if (*cmp_cmd) return cmd_compare(cmp_a, cmp_b, cmp_out);
    if (*cal_cmd) return cmd_calibrate(cal_params, cal_out, cal_scale, cal_seed);
    if (*cat_cmd) return cmd_catalog(cat_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
