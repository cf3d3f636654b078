// memsrel: simulate and analyse destructive and long-term tests of the
// three-axial silicon force sensor.
//
// Exit codes: 0 success, 2 usage/config/data error, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "memsrel/curve_analysis.hpp"
#include "memsrel/error.hpp"
#include "memsrel/io.hpp"
#include "memsrel/reliability_stats.hpp"
#include "memsrel/sensor_model.hpp"
#include "memsrel/testbench.hpp"

namespace fs = std::filesystem;
using memsrel::json;

namespace {

constexpr int kExitData = 2;
constexpr int kExitIo = 3;

struct ConfigError : memsrel::Error {
  using memsrel::Error::Error;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string side = "front";
  int fleet = 20;
  std::string out = ".";
  std::string config_path;
  double dz_max = 200.0;
  double step = 0.5;
  double v_ges = 1.0;
  bool noiseless = false;
  int cycles = 50'000;
  int record_interval = 500;
  double drift = 0.0;
  double f_max = 0.5;
  double drop_fraction = 0.10;
  double drop_floor = 0.05;
  double sigma_multiple = 3.0;
  double nominal_dz = 2.0;
  std::string params;
  std::string invert;
  std::vector<std::string> inputs;
};

/// Options bound to RunConfig fields, keyed by their config-file name.
class OptionTable {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, T& field,
           const std::string& help) {
    CLI::Option* opt = app->add_option(flag, field, help);
    entries_[app].push_back({key, opt, [&field](const json& j) { field = j.get<T>(); }});
  }

  void add_flag(CLI::App* app, const std::string& flag, const std::string& key, bool& field,
                const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, field, help);
    entries_[app].push_back({key, opt, [&field](const json& j) { field = j.get<bool>(); }});
  }

  void add_seed(CLI::App* app, std::optional<std::uint64_t>& seed) {
    CLI::Option* opt = app->add_option_function<std::uint64_t>(
        "--seed", [&seed](std::uint64_t v) { seed = v; }, "Master seed (required)");
    entries_[app].push_back({"seed", opt, [&seed](const json& j) { seed = j.get<std::uint64_t>(); }});
  }

  /// Fills every option of `app` that was not given on the command line from
  /// the config file. Flags win.
  void apply_config(CLI::App* app, const std::string& path) {
    if (path.empty()) return;
    json config;
    try {
      config = json::parse(memsrel::read_file(path));
    } catch (const json::exception& e) {
      throw ConfigError("config " + path + ": " + e.what());
    }
    if (!config.is_object()) throw ConfigError("config " + path + ": expected a JSON object");
    for (auto& entry : entries_[app]) {
      if (entry.option->count() > 0 || !config.contains(entry.key)) continue;
      try {
        entry.assign(config.at(entry.key));
      } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": key '" + entry.key + "': " + e.what());
      }
    }
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    std::function<void(const json&)> assign;
  };
  std::map<CLI::App*, std::vector<Entry>> entries_;
};

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("a seed is required (--seed or \"seed\" in the config file)");
  return *cfg.seed;
}

memsrel::RigConfig rig_for(const RunConfig& cfg) {
  return cfg.noiseless ? memsrel::RigConfig::noiseless() : memsrel::RigConfig{};
}

memsrel::StaticProtocol static_protocol(const RunConfig& cfg) {
  memsrel::StaticProtocol p;
  p.side = memsrel::parse_load_side(cfg.side);
  p.dz_max = cfg.dz_max;
  p.step = cfg.step;
  p.v_ges = cfg.v_ges;
  return p;
}

memsrel::DynamicProtocol dynamic_protocol(const RunConfig& cfg) {
  memsrel::DynamicProtocol p;
  p.side = memsrel::parse_load_side(cfg.side);
  p.f_max = cfg.f_max;
  p.n_cycles = cfg.cycles;
  p.record_interval = cfg.record_interval;
  p.v_ges = cfg.v_ges;
  p.drift_mv = cfg.drift;
  return p;
}

memsrel::DetectionThresholds thresholds(const RunConfig& cfg) {
  return {cfg.drop_fraction, cfg.drop_floor};
}

std::string specimen_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "specimen_%03d.csv", i);
  return buf;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw memsrel::IoError("cannot create directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

memsrel::SideReport side_report(const memsrel::FleetSummary& summary, const memsrel::SensorSpec& spec,
                                double nominal_dz) {
  memsrel::SideReport side{summary, std::nullopt};
  if (!summary.budget.empty()) side.overload = memsrel::overload_factors(summary, spec, nominal_dz);
  return side;
}

// Subcommands -----------------------------------------------------------------

int simulate_static(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.fleet < 1) throw ConfigError("--fleet must be at least 1");
  const memsrel::SensorSpec spec;
  const memsrel::RigConfig rig = rig_for(cfg);
  const memsrel::StaticProtocol protocol = static_protocol(cfg);
  protocol.validate(rig);

  memsrel::FleetParams params;
  params.count = cfg.fleet;
  params.seed = seed;
  const auto curves = memsrel::run_fleet(params, spec, protocol, rig);

  const fs::path out = ensure_dir(cfg.out);
  json files = json::array();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const std::string name = specimen_name(int(i));
    memsrel::write_file_atomic(out / name, memsrel::format_curve_csv(curves[i]));
    files.push_back(name);
  }
  json effective{{"command", "simulate-static"}, {"seed", seed},       {"fleet", cfg.fleet},
                 {"protocol", protocol},         {"rig", rig},         {"fleet_params",
                                                                         {{"front", params.front},
                                                                          {"back", params.back}}}};
  json manifest = effective;
  manifest["side"] = std::string(memsrel::to_string(protocol.side));
  manifest["files"] = files;
  manifest["config_hash"] = memsrel::fnv1a_hex(effective.dump());
  manifest["tool_version"] = std::string(memsrel::kToolVersion);
  memsrel::write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << curves.size() << " curves and manifest.json to " << out.string() << "\n";
  return 0;
}

struct CurveInputs {
  std::vector<memsrel::LoadCurve> curves;
  std::optional<std::uint64_t> seed;
  std::string content_hash;
};

CurveInputs load_curves(const RunConfig& cfg, const CLI::App* sub) {
  if (cfg.inputs.empty()) throw ConfigError("analyze needs input curve files or a directory");
  std::optional<std::string> manifest_side;
  CurveInputs in;
  std::vector<fs::path> files;
  for (const std::string& input : cfg.inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      const fs::path manifest_path = p / "manifest.json";
      if (fs::exists(manifest_path)) {
        json manifest;
        try {
          manifest = json::parse(memsrel::read_file(manifest_path));
          for (const auto& f : manifest.at("files")) files.push_back(p / f.get<std::string>());
          manifest_side = manifest.at("side").get<std::string>();
          if (manifest.contains("seed")) in.seed = manifest.at("seed").get<std::uint64_t>();
        } catch (const json::exception& e) {
          throw memsrel::ParseError(manifest_path.string() + ": " + e.what());
        }
      } else {
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(p)) {
          if (entry.path().extension() == ".csv") found.push_back(entry.path());
        }
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
      }
    } else {
      files.push_back(p);
    }
  }
  const bool side_flag = sub->get_option("--side")->count() > 0;
  const memsrel::LoadSide side =
      memsrel::parse_load_side(side_flag || !manifest_side ? cfg.side : *manifest_side);
  std::string digest;
  for (const fs::path& f : files) {
    const std::string text = memsrel::read_file(f);
    digest += memsrel::fnv1a_hex(text);
    in.curves.push_back(memsrel::parse_curve_csv(text, side, f.string()));
  }
  in.content_hash = memsrel::fnv1a_hex(digest);
  return in;
}

int analyze(const RunConfig& cfg, const CLI::App* sub) {
  const memsrel::SensorSpec spec;
  const CurveInputs in = load_curves(cfg, sub);
  const auto summary = memsrel::fleet_summary(in.curves, spec, thresholds(cfg));

  memsrel::Report report;
  report.fleets.push_back(side_report(summary, spec, cfg.nominal_dz));
  report.provenance.seed = in.seed;
  const json effective{{"command", "analyze"},
                       {"side", std::string(memsrel::to_string(summary.side))},
                       {"drop_fraction", cfg.drop_fraction},
                       {"drop_floor", cfg.drop_floor},
                       {"nominal_dz", cfg.nominal_dz},
                       {"inputs", in.content_hash}};
  report.provenance.config_hash = memsrel::fnv1a_hex(effective.dump());

  const fs::path out = ensure_dir(cfg.out);
  memsrel::write_file_atomic(out / "report.json", json(report).dump(2) + "\n");
  std::cout << memsrel::format_fleet_table(report.fleets.front());
  return 0;
}

int fit_weibull(const RunConfig& cfg) {
  json result;
  memsrel::WeibullParams params;
  if (!cfg.params.empty()) {
    if (!cfg.inputs.empty()) throw ConfigError("give either an input file or --params, not both");
    const auto values = memsrel::parse_number_list(cfg.params);
    if (values.size() != 2 || !(values[0] > 0.0) || !(values[1] > 0.0)) {
      throw ConfigError("--params expects two positive numbers f0,beta");
    }
    params = {values[0], values[1]};
    result = json{{"f0", params.f0}, {"beta", params.beta}, {"source", "params"}};
  } else {
    if (cfg.inputs.size() != 1) throw ConfigError("fit-weibull needs exactly one force file");
    const std::string& path = cfg.inputs.front();
    const auto forces = memsrel::parse_force_list(memsrel::read_file(path), path);
    const memsrel::WeibullFit fit = memsrel::fit_weibull(forces);
    params = fit.params;
    result = fit;
    result["n"] = forces.size();
    result["source"] = "fit";
  }
  if (!cfg.invert.empty()) {
    json rows = json::array();
    for (double p : memsrel::parse_number_list(cfg.invert)) {
      rows.push_back({{"probability", p}, {"f_max_N", memsrel::invert_failure_probability(params, p)}});
    }
    result["invert"] = rows;
  }
  std::cout << result.dump(2) << "\n";
  return 0;
}

int write_degradation(const memsrel::CycleLog& log, const RunConfig& cfg,
                      std::optional<std::uint64_t> seed, const json& effective, bool write_log) {
  const auto degradation = memsrel::degradation_report(log, cfg.sigma_multiple);
  memsrel::Report report;
  report.degradation = degradation;
  report.provenance.seed = seed;
  report.provenance.config_hash = memsrel::fnv1a_hex(effective.dump());
  const fs::path out = ensure_dir(cfg.out);
  if (write_log) memsrel::write_file_atomic(out / "cycle_log.csv", memsrel::format_cycle_csv(log));
  memsrel::write_file_atomic(out / "degradation.json", json(report).dump(2) + "\n");
  std::cout << memsrel::format_degradation_table(degradation);
  return 0;
}

int simulate_dynamic(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  const memsrel::SensorSpec spec;
  const memsrel::RigConfig rig = rig_for(cfg);
  const memsrel::DynamicProtocol protocol = dynamic_protocol(cfg);
  protocol.validate(rig);

  memsrel::FleetParams params;
  params.seed = seed;
  memsrel::Rng rng(memsrel::derive_seed(seed, 0));
  const memsrel::SensorState state = memsrel::sample_specimen(params, spec, protocol.side, rng);
  const memsrel::CycleLog log = memsrel::run_dynamic(state, spec, protocol, rig, rng);
  const json effective{{"command", "simulate-dynamic"}, {"seed", seed},
                       {"protocol", protocol},          {"rig", rig},
                       {"sigma_multiple", cfg.sigma_multiple}};
  return write_degradation(log, cfg, seed, effective, true);
}

int degradation(const RunConfig& cfg) {
  if (cfg.inputs.size() != 1) throw ConfigError("degradation needs exactly one cycle-log CSV");
  const std::string& path = cfg.inputs.front();
  const std::string text = memsrel::read_file(path);
  const memsrel::CycleLog log = memsrel::parse_cycle_csv(text, path, cfg.v_ges);
  const json effective{{"command", "degradation"},
                       {"sigma_multiple", cfg.sigma_multiple},
                       {"input", memsrel::fnv1a_hex(text)}};
  return write_degradation(log, cfg, std::nullopt, effective, false);
}

int full_report(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.fleet < 3) throw ConfigError("report needs --fleet of at least 3");
  const memsrel::SensorSpec spec;
  const memsrel::RigConfig rig = rig_for(cfg);

  memsrel::Report report;
  memsrel::FleetParams params;
  params.count = cfg.fleet;
  for (memsrel::LoadSide side : {memsrel::LoadSide::Front, memsrel::LoadSide::Back}) {
    memsrel::StaticProtocol protocol = static_protocol(cfg);
    protocol.side = side;
    params.seed = memsrel::derive_seed(seed, 1000 + std::uint64_t(side));
    const auto curves = memsrel::run_fleet(params, spec, protocol, rig);
    report.fleets.push_back(
        side_report(memsrel::fleet_summary(curves, spec, thresholds(cfg)), spec, cfg.nominal_dz));
  }

  memsrel::DynamicProtocol dyn = dynamic_protocol(cfg);
  dyn.side = memsrel::LoadSide::Front;
  memsrel::Rng rng(memsrel::derive_seed(seed, 2000));
  params.seed = seed;
  const memsrel::SensorState state = memsrel::sample_specimen(params, spec, dyn.side, rng);
  const memsrel::CycleLog log = memsrel::run_dynamic(state, spec, dyn, rig, rng);
  report.degradation = memsrel::degradation_report(log, cfg.sigma_multiple);

  const json effective{{"command", "report"}, {"seed", seed},        {"fleet", cfg.fleet},
                       {"rig", rig},          {"dynamic", dyn},      {"dz_max", cfg.dz_max},
                       {"step", cfg.step},    {"drop_fraction", cfg.drop_fraction},
                       {"drop_floor", cfg.drop_floor}, {"sigma_multiple", cfg.sigma_multiple}};
  report.provenance.seed = seed;
  report.provenance.config_hash = memsrel::fnv1a_hex(effective.dump());

  const fs::path out = ensure_dir(cfg.out);
  memsrel::write_file_atomic(out / "report.json", json(report).dump(2) + "\n");
  for (const auto& side : report.fleets) std::cout << memsrel::format_fleet_table(side) << "\n";
  std::cout << memsrel::format_degradation_table(*report.degradation);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual test bench and reliability analysis for a three-axial silicon force sensor"};
  app.require_subcommand(1);
  RunConfig cfg;
  OptionTable table;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cfg.config_path, "JSON config file; flags override its values");
    table.add(sub, "--out", "out", cfg.out, "Output directory");
  };
  auto add_static = [&](CLI::App* sub) {
    table.add(sub, "--dz-max", "dz_max", cfg.dz_max, "Ramp end displacement [um]");
    table.add(sub, "--step", "step", cfg.step, "Ramp step [um]");
    table.add_flag(sub, "--noiseless", "noiseless", cfg.noiseless, "Disable instrument noise");
  };
  auto add_thresholds = [&](CLI::App* sub) {
    table.add(sub, "--drop-fraction", "drop_fraction", cfg.drop_fraction, "Relative force drop marking a failure");
    table.add(sub, "--drop-floor", "drop_floor", cfg.drop_floor, "Minimum force drop marking a failure [N]");
    table.add(sub, "--nominal-dz", "nominal_dz", cfg.nominal_dz, "Nominal working displacement [um]");
  };
  auto add_dynamic = [&](CLI::App* sub) {
    table.add(sub, "--cycles", "cycles", cfg.cycles, "Number of load cycles");
    table.add(sub, "--record-interval", "record_interval", cfg.record_interval, "Cycles between records");
    table.add(sub, "--drift", "drift", cfg.drift, "Injected offset drift over the run [mV]");
    table.add(sub, "--f-max", "f_max", cfg.f_max, "Hold force [N]");
    table.add(sub, "--sigma-multiple", "sigma_multiple", cfg.sigma_multiple, "Trend test threshold in sigmas");
  };

  auto* sim_static = app.add_subcommand("simulate-static", "Simulate a fleet of destructive static ramps");
  add_common(sim_static);
  table.add_seed(sim_static, cfg.seed);
  table.add(sim_static, "--side", "side", cfg.side, "Load side: front|back");
  table.add(sim_static, "--fleet", "fleet", cfg.fleet, "Number of specimens");
  table.add(sim_static, "--v-ges", "v_ges", cfg.v_ges, "Bridge supply voltage [V]");
  add_static(sim_static);

  auto* sim_dynamic = app.add_subcommand("simulate-dynamic", "Simulate a long-term cycling run");
  add_common(sim_dynamic);
  table.add_seed(sim_dynamic, cfg.seed);
  table.add(sim_dynamic, "--side", "side", cfg.side, "Load side: front|back");
  table.add(sim_dynamic, "--v-ges", "v_ges", cfg.v_ges, "Bridge supply voltage [V]");
  table.add_flag(sim_dynamic, "--noiseless", "noiseless", cfg.noiseless, "Disable instrument noise");
  add_dynamic(sim_dynamic);

  auto* analyze_cmd = app.add_subcommand("analyze", "Analyse static load-curve CSV files");
  add_common(analyze_cmd);
  analyze_cmd->add_option("inputs", cfg.inputs, "Curve CSV files or simulation directories")->required();
  table.add(analyze_cmd, "--side", "side", cfg.side, "Load side when no manifest is present");
  add_thresholds(analyze_cmd);

  auto* fit_cmd = app.add_subcommand("fit-weibull", "Fit a Weibull law to fracture forces");
  fit_cmd->add_option("--config", cfg.config_path, "JSON config file; flags override its values");
  fit_cmd->add_option("input", cfg.inputs, "One-column CSV of fracture forces [N]");
  table.add(fit_cmd, "--params", "params", cfg.params, "Use f0,beta instead of fitting");
  table.add(fit_cmd, "--invert", "invert", cfg.invert, "Comma-separated failure probabilities");

  auto* degr_cmd = app.add_subcommand("degradation", "Degradation verdict for a cycle-log CSV");
  add_common(degr_cmd);
  degr_cmd->add_option("input", cfg.inputs, "Cycle-log CSV")->required();
  table.add(degr_cmd, "--sigma-multiple", "sigma_multiple", cfg.sigma_multiple, "Trend test threshold in sigmas");

  auto* report_cmd = app.add_subcommand("report", "Run both static fleets and a cycling run, then report");
  add_common(report_cmd);
  table.add_seed(report_cmd, cfg.seed);
  table.add(report_cmd, "--fleet", "fleet", cfg.fleet, "Specimens per load side");
  add_static(report_cmd);
  add_dynamic(report_cmd);
  add_thresholds(report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitData;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    table.apply_config(sub, cfg.config_path);
    if (sub == sim_static) return simulate_static(cfg);
    if (sub == sim_dynamic) return simulate_dynamic(cfg);
    if (sub == analyze_cmd) return analyze(cfg, sub);
    if (sub == fit_cmd) return fit_weibull(cfg);
    if (sub == degr_cmd) return degradation(cfg);
    return full_report(cfg);
  } catch (const memsrel::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const memsrel::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
