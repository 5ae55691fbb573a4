// midblock: run the crossing-alert scenarios and score trajectories.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "midblock/config.hpp"
#include "midblock/energy.hpp"
#include "midblock/errors.hpp"
#include "midblock/report.hpp"
#include "midblock/scenario.hpp"

namespace fs = std::filesystem;
using namespace midblock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

constexpr const char* kOutDirEnv = "MIDBLOCK_OUT_DIR";
constexpr const char* kDefaultOutDir = "midblock-out";

struct IoError : Error {
  using Error::Error;
};

struct Options {
  std::string config;
  std::string out;
  std::string vehicle;
  std::optional<double> eta;
  std::optional<double> dt;
  std::string scenario;
  std::string csv;
};

std::string out_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return kDefaultOutDir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

std::vector<ScenarioConfig> resolve_configs(const Options& o) {
  std::vector<ScenarioConfig> configs = o.config.empty() ? default_suite() : load_suite_config(o.config);

  if (!o.vehicle.empty()) {
    // A known label filters the suite; anything else replaces its vehicles.
    std::vector<ScenarioConfig> filtered;
    for (const auto& c : configs) {
      if (c.vehicle.label == o.vehicle) filtered.push_back(c);
    }
    if (filtered.empty()) {
      const VehicleSpec v = resolve_vehicle(o.vehicle);
      for (const auto& c : configs) {
        if (!filtered.empty() && filtered.back().name == c.name) continue;
        ScenarioConfig copy = c;
        copy.vehicle = v;
        filtered.push_back(copy);
      }
    }
    configs = std::move(filtered);
  }
  for (auto& c : configs) {
    if (o.eta) c.vehicle.eta = *o.eta;
    if (o.dt) c.limits.dt = *o.dt;
    c.validate();
  }
  return configs;
}

int write_suite(const std::vector<ScenarioConfig>& configs, const fs::path& dir) {
  std::vector<ComparisonRow> rows;
  RunManifest manifest;
  manifest.config_digest = config_digest(configs);
  manifest.timestamp = manifest_timestamp();

  for (const auto& c : configs) {
    const ScenarioOutcome outcome = evaluate_scenario(c);
    for (const auto& p : outcome.policies) {
      if (!p.run) continue;
      const std::string rel =
          "trajectories/" + c.name + "__" + c.vehicle.label + "__" + std::string(to_string(p.policy)) + ".csv";
      std::ostringstream csv;
      write_trajectory_csv(csv, p.run->trajectory);
      write_file(dir / rel, csv.str());
      manifest.output_paths.push_back(rel);
    }
    for (auto& r : comparison_rows(outcome)) rows.push_back(std::move(r));
  }
  rows = order_rows(std::move(rows));

  std::ostringstream table;
  write_comparison_csv(table, rows);
  write_file(dir / "comparison.csv", table.str());
  manifest.output_paths.push_back("comparison.csv");
  manifest.output_paths.push_back("manifest.json");
  write_file(dir / "manifest.json", manifest_json(manifest));

  write_table(std::cout, rows);
  std::cout << "wrote " << manifest.output_paths.size() << " files to " << dir.string() << '\n';

  bool infeasible = false;
  for (const auto& r : rows) {
    if (!r.ok) {
      std::cerr << "midblock: infeasible run: " << r.scenario << ' ' << r.vehicle << ' ' << to_string(r.policy)
                << ": " << r.error << '\n';
      infeasible = true;
    }
  }
  return infeasible ? kExitInfeasible : kExitOk;
}

int cmd_suite(const Options& o) { return write_suite(resolve_configs(o), out_dir(o)); }

int cmd_run(const Options& o) {
  std::vector<ScenarioConfig> selected;
  for (const auto& c : resolve_configs(o)) {
    if (c.name == o.scenario) selected.push_back(c);
  }
  if (selected.empty()) throw ConfigError("no scenario named '" + o.scenario + "'");
  return write_suite(selected, out_dir(o));
}

int cmd_score(const Options& o) {
  VehicleSpec spec = resolve_vehicle(o.vehicle.empty() ? "camry" : o.vehicle);
  if (o.eta) spec.eta = *o.eta;
  spec.validate();
  std::ifstream in(o.csv, std::ios::binary);
  if (!in) throw IoError("cannot read '" + o.csv + "'");
  const Trajectory traj = ingest_trajectory(in);
  const EnergyReport report = energy_of(traj, spec);
  std::cout << energy_record(report, spec) << '\n';
  write_energy_block(std::cout, report, spec);
  return kExitOk;
}

int cmd_plotdata(const Options& o) {
  const fs::path dir = out_dir(o);
  std::ifstream in(dir / "comparison.csv", std::ios::binary);
  if (!in) throw ConfigError("no suite output in '" + dir.string() + "' (comparison.csv missing)");
  const auto rows = read_comparison_csv(in);
  std::ostringstream inc;
  std::ostringstream red;
  write_increase_csv(inc, rows);
  write_reduction_csv(red, rows);
  write_file(dir / "increase_vs_nopeds.csv", inc.str());
  write_file(dir / "reduction_vs_suddenstop.csv", red.str());
  std::cout << "wrote increase_vs_nopeds.csv and reduction_vs_suddenstop.csv to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crossing-alert speed policies: fuel and CO2 comparison"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Options o;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario suite file (JSON); built-in fixtures when omitted");
    sub->add_option("--out", o.out, std::string("Output directory (else $") + kOutDirEnv + ", else " +
                                        kDefaultOutDir + ")");
    sub->add_option("--vehicle", o.vehicle, "Restrict to a vehicle label, or substitute camry|highlander|spec file");
    sub->add_option("--eta", o.eta, "Override drivetrain efficiency")->check(CLI::Range(1e-6, 1.0));
    sub->add_option("--dt", o.dt, "Override simulation step (s)")->check(CLI::PositiveNumber);
  };

  auto* suite = app.add_subcommand("suite", "Run every scenario under all four policies");
  add_run_flags(suite);

  auto* run = app.add_subcommand("run", "Run one scenario under all four policies");
  run->add_option("scenario", o.scenario, "Scenario name, e.g. scenario-3")->required();
  add_run_flags(run);

  auto* score = app.add_subcommand("score", "Fuel and CO2 for a trajectory CSV");
  score->add_option("csv", o.csv, "Trajectory CSV (time_s,speed_mps[,accel_mps2])")->required();
  score->add_option("--vehicle", o.vehicle, "camry, highlander or a vehicle spec file")->default_str("camry");
  score->add_option("--eta", o.eta, "Drivetrain efficiency")->check(CLI::Range(1e-6, 1.0));

  auto* plotdata = app.add_subcommand("plotdata", "Write percentage CSVs from a finished suite");
  plotdata->add_option("--out", o.out, "Suite output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*suite) return cmd_suite(o);
    if (*run) return cmd_run(o);
    if (*score) return cmd_score(o);
    if (*plotdata) return cmd_plotdata(o);
  } catch (const IoError& e) {
    std::cerr << "midblock: error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "midblock: error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InfeasibleConstraint& e) {
    std::cerr << "midblock: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    // Config, schema and scenario errors.
    std::cerr << "midblock: error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
