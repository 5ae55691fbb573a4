#include "midblock/config.hpp"
#include "midblock/report.hpp"

#include <cstdlib>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace midblock {
namespace {

const char* kMinimal = R"({
  "format_version": 1,
  "defaults": {"street_length_m": 400},
  "vehicles": [{"label": "camry", "mass_kg": 1644, "f0_n": 113.82, "f2_n_s2_per_m2": 0.36}],
  "scenarios": [
    {"name": "a", "alerts": [{"location_m": 200, "crossing_start_s": 3}]},
    {"name": "b", "dt_s": 0.25, "alerts": [{"location_m": 300, "crossing_start_s": 4, "receipt_time_s": 5,
                                            "crossing_duration_s": 12}]}
  ]
})";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

TEST(ConfigFile, FixtureMatchesBuiltInSuite) {
  const auto loaded = load_suite_config(MIDBLOCK_FIXTURE_DIR "/canonical_scenarios.json");
  const auto builtin = default_suite();
  ASSERT_EQ(loaded.size(), 12u);
  EXPECT_EQ(loaded, builtin);
  EXPECT_EQ(config_digest(loaded), config_digest(builtin));
}

TEST(ConfigFile, DefaultsAndOverrides) {
  const auto cs = parse_suite_config(kMinimal);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].street_length, 400.0);
  EXPECT_EQ(cs[0].limits.dt, 0.5);
  EXPECT_EQ(cs[0].alerts[0].receipt_time, 3.0);
  EXPECT_EQ(cs[0].alerts[0].crossing_duration, 20.0);
  EXPECT_EQ(cs[0].vehicle.eta, 0.21);
  EXPECT_EQ(cs[1].limits.dt, 0.25);
  EXPECT_EQ(cs[1].alerts[0].receipt_time, 5.0);
  EXPECT_EQ(cs[1].alerts[0].crossing_end(), 16.0);
}

TEST(ConfigFile, Errors) {
  EXPECT_THROW(parse_suite_config("{"), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"format_version\": 1", "\"format_version\": 2")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"street_length_m\": 400", "\"street_lenght_m\": 400")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"street_length_m\": 400", "\"street_length_m\": \"long\"")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"name\": \"b\"", "\"name\": \"a\"")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"name\": \"b\"", "\"name\": \"../b\"")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"mass_kg\": 1644", "\"mass_kg\": -5")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"location_m\": 200", "\"location_m\": 900")), ConfigError);
  EXPECT_THROW(parse_suite_config(with("\"receipt_time_s\": 5", "\"receipt_time_s\": 1")), ConfigError);
  try {
    load_suite_config("/nonexistent/suite.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/suite.json"), std::string::npos);
  }
}

TEST(ConfigFile, DigestTracksContent) {
  const auto a = parse_suite_config(kMinimal);
  EXPECT_EQ(config_digest(a), config_digest(parse_suite_config(kMinimal)));
  EXPECT_EQ(config_digest(a).size(), 16u);
  const auto b = parse_suite_config(with("\"street_length_m\": 400", "\"street_length_m\": 401"));
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(ConfigFile, ResolveVehicle) {
  EXPECT_EQ(resolve_vehicle("camry").mass, 1644.0);
  EXPECT_EQ(resolve_vehicle("highlander").f2, 0.56);
  EXPECT_THROW(resolve_vehicle("tractor"), ConfigError);
}

TEST(Report, ComparisonCsvRoundTrip) {
  auto rows = run_suite(canonical_scenarios(ScenarioConfig{}));
  ComparisonRow failed;
  failed.scenario = "x";
  failed.vehicle = "camry";
  failed.policy = PolicyId::Option1;
  failed.ok = false;
  failed.error = "alert 1: crossing, too close";
  rows.push_back(failed);

  std::ostringstream out;
  write_comparison_csv(out, rows);
  std::istringstream in(out.str());
  const auto back = read_comparison_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    EXPECT_EQ(back[i].fuel_j, rows[i].fuel_j);
    EXPECT_EQ(back[i].co2_g, rows[i].co2_g);
    EXPECT_EQ(back[i].pct_reduction_vs_suddenstop, rows[i].pct_reduction_vs_suddenstop);
    EXPECT_EQ(back[i].modes, rows[i].modes);
    EXPECT_EQ(back[i].policy, rows[i].policy);
  }
  EXPECT_FALSE(back.back().ok);
  EXPECT_EQ(back.back().error, "alert 1: crossing; too close");
  EXPECT_NE(out.str().find("x,camry,Option1,infeasible,,,,,,,,,,,,,,alert"), std::string::npos);
}

TEST(Report, PlotDataCsvs) {
  const auto rows = run_suite(canonical_scenarios(ScenarioConfig{}));
  std::ostringstream inc;
  std::ostringstream red;
  write_increase_csv(inc, rows);
  write_reduction_csv(red, rows);

  std::istringstream lines(red.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "scenario,policy,vehicle,pct_reduction_fuel,pct_reduction_co2");
  int options = 0;
  int total = 0;
  while (std::getline(lines, line)) {
    ++total;
    if (line.find(",Option") == std::string::npos) continue;
    ++options;
    const auto f = detail::split_commas(line);
    ASSERT_EQ(f.size(), 5u);
    const double fuel = detail::parse_field(f[3], 0);
    const double co2 = detail::parse_field(f[4], 0);
    EXPECT_GE(fuel, 0.0);
    EXPECT_NEAR(fuel, co2, 1e-9);
  }
  EXPECT_EQ(total, 24);  // one vehicle in this suite
  EXPECT_EQ(options, 12);
  EXPECT_NE(inc.str().find("scenario-1,NoPeds,camry,0,0"), std::string::npos);
}

TEST(Report, ManifestTimestamp) {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  EXPECT_EQ(manifest_timestamp(), "1970-01-02T00:00:00Z");
  ::setenv("SOURCE_DATE_EPOCH", "soon", 1);
  EXPECT_THROW(manifest_timestamp(), ConfigError);
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(manifest_timestamp(), "1970-01-01T00:00:00Z");

  RunManifest m;
  m.config_digest = "00ff";
  m.timestamp = "t";
  m.output_paths = {"a.csv"};
  const auto j = nlohmann::json::parse(manifest_json(m));
  EXPECT_EQ(j["tool_version"], std::string(kToolVersion));
  EXPECT_EQ(j["output_paths"][0], "a.csv");
}

TEST(Report, EnergyRecordIsOneLine) {
  Trajectory t;
  t.dt = 0.5;
  for (int k = 0; k <= 149; ++k) t.samples.push_back({k * 0.5, 13.4 * k * 0.5, 13.4, 0.0});
  VehicleSpec spec = camry();
  spec.eta = 0.2;
  const auto r = energy_of(t, spec);
  const std::string line = energy_record(r, spec);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["e_fuel_j"].get<double>(), r.e_fuel);
  EXPECT_NEAR(j["e_fuel_kj"].get<double>(), 890.8, 0.1);
  std::ostringstream block;
  write_energy_block(block, r, spec);
  EXPECT_NE(block.str().find("fuel energy"), std::string::npos);
}

}  // namespace
}  // namespace midblock
