#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <tuple>
#include <string>
#include <vector>

#include "midblock/alert_policy.hpp"
#include "midblock/energy.hpp"
#include "midblock/errors.hpp"
#include "midblock/vehicle_dynamics.hpp"

namespace midblock {

inline constexpr double kMetersPerSecondPerMph = 0.44704;

inline double to_mph(double mps) { return mps / kMetersPerSecondPerMph; }

struct AlertSpec {
  double receipt_time = 0.0;
  double location = 0.0;
  double crossing_start = 0.0;
  double crossing_duration = 20.0;

  double crossing_end() const { return crossing_start + crossing_duration; }
  friend bool operator==(const AlertSpec&, const AlertSpec&) = default;
};

struct ScenarioConfig {
  std::string name = "default";
  double street_length = 500.0;
  double street_width = 13.0;
  double pedestrian_speed = 0.67;
  double crossing_duration = 20.0;
  std::vector<AlertSpec> alerts;
  VehicleSpec vehicle = camry();
  KinematicLimits limits;  // carries v_max
  ModeThresholds thresholds;

  void validate() const {
    if (name.empty()) throw ConfigError("scenario name must not be empty");
    if (!(street_length > 0.0)) throw ConfigError(name + ": street_length must be > 0");
    if (!(street_width > 0.0)) throw ConfigError(name + ": street_width must be > 0");
    if (!(pedestrian_speed > 0.0)) throw ConfigError(name + ": pedestrian_speed must be > 0");
    if (!(crossing_duration > 0.0)) throw ConfigError(name + ": crossing_duration must be > 0");
    vehicle.validate();
    limits.validate();
    thresholds.validate();
    for (const auto& a : alerts) {
      if (a.receipt_time < a.crossing_start) throw ConfigError(name + ": alert received before its crossing starts");
      if (!(a.crossing_duration > 0.0)) throw ConfigError(name + ": crossing_duration must be > 0");
    }
    try {
      detail::validate_alerts(alert_events(), street_length);
    } catch (const MalformedScenario& e) {
      throw ConfigError(name + ": " + e.what());
    }
  }

  /// Alerts in receipt order, numbered from 1.
  std::vector<AlertEvent> alert_events() const {
    std::vector<AlertEvent> out;
    out.reserve(alerts.size());
    for (const auto& a : alerts) {
      AlertEvent e;
      e.ordinal = static_cast<int>(out.size()) + 1;
      e.receipt_time = a.receipt_time;
      e.location = a.location;
      e.crossing_start = a.crossing_start;
      e.crossing_end = a.crossing_end();
      e.pedestrian_speed = pedestrian_speed;
      e.street_width = street_width;
      out.push_back(e);
    }
    return out;
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Three crossings per scenario, alert delivered when the crossing starts.
/// Locations and times are laid out for a 500 m street at 13.4 m/s so that:
///  - scenarios 1, 2 and 5 offer the deferral option at least once;
///  - scenarios 3, 4 and 6 never do;
///  - scenario 3 receives its alerts at 10 s and 20 s, scenario 4 its third at 28 s.
inline std::vector<ScenarioConfig> canonical_scenarios(const ScenarioConfig& defaults) {
  struct Crossing {
    double start;
    double location;
  };
  static constexpr std::array<std::array<Crossing, 3>, 6> kLayout{{
      {{{7.0, 180.0}, {20.0, 200.0}, {28.0, 420.0}}},   // near first, each later one farther
      {{{13.0, 395.0}, {15.0, 415.0}, {19.0, 315.0}}},  // farther second, nearest third
      {{{10.0, 445.0}, {20.0, 365.0}, {23.0, 420.0}}},  // free first, nearer second, farther third
      {{{10.0, 410.0}, {20.0, 365.0}, {28.0, 470.0}}},  // as 3, third crossing without effect
      {{{0.0, 330.0}, {10.0, 385.0}, {21.0, 360.0}}},   // free first, farther second, nearer third
      {{{9.0, 460.0}, {13.0, 415.0}, {23.0, 385.0}}},   // each crossing nearer than the last
  }};

  std::vector<ScenarioConfig> out;
  for (std::size_t i = 0; i < kLayout.size(); ++i) {
    ScenarioConfig c = defaults;
    c.name = "scenario-" + std::to_string(i + 1);
    c.alerts.clear();
    for (const auto& x : kLayout[i]) c.alerts.push_back({x.start, x.location, x.start, defaults.crossing_duration});
    out.push_back(std::move(c));
  }
  return out;
}

struct PolicyOutcome {
  PolicyId policy = PolicyId::NoPeds;
  std::optional<PolicyRun> run;
  std::optional<EnergyReport> report;
  std::string error;  // set when the run failed

  bool ok() const { return report.has_value(); }
};

struct ScenarioOutcome {
  ScenarioConfig config;
  std::array<PolicyOutcome, 4> policies;  // in kAllPolicies order

  const PolicyOutcome& at(PolicyId p) const {
    for (const auto& o : policies) {
      if (o.policy == p) return o;
    }
    throw Error("policy missing from outcome");
  }
};

inline ScenarioOutcome evaluate_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioOutcome out{config, {}};
  const auto alerts = config.alert_events();
  for (std::size_t i = 0; i < kAllPolicies.size(); ++i) {
    PolicyOutcome& o = out.policies[i];
    o.policy = kAllPolicies[i];
    try {
      o.run = run_policy(o.policy, alerts, config.limits, config.street_length);
      o.report = energy_of(o.run->trajectory, config.vehicle, config.thresholds);
    } catch (const InfeasibleConstraint& e) {
      o.error = e.what();
    }
  }
  return out;
}

struct ComparisonRow {
  std::string scenario;
  std::string vehicle;
  PolicyId policy = PolicyId::NoPeds;
  bool ok = true;
  std::string error;
  double e_inst_j = 0.0;
  double fuel_j = 0.0;
  double fuel_kj = 0.0;
  double co2_g = 0.0;
  double pct_increase_vs_nopeds = std::numeric_limits<double>::quiet_NaN();
  double pct_reduction_vs_suddenstop = std::numeric_limits<double>::quiet_NaN();
  ModeDurations modes;
  double mean_speed_mph = 0.0;
  double speed_stddev_mph = 0.0;
  double trip_time_s = 0.0;
};

/// Increase over a baseline, percent of the baseline.
inline double pct_increase(double value, double baseline) { return 100.0 * (value - baseline) / baseline; }
/// Reduction below a baseline, percent of the baseline; positive when lower.
inline double pct_reduction(double value, double baseline) { return 100.0 * (baseline - value) / baseline; }

inline std::array<ComparisonRow, 4> comparison_rows(const ScenarioOutcome& outcome) {
  const auto& nopeds = outcome.at(PolicyId::NoPeds);
  const auto& sudden = outcome.at(PolicyId::SuddenStop);
  std::array<ComparisonRow, 4> rows;
  for (std::size_t i = 0; i < outcome.policies.size(); ++i) {
    const PolicyOutcome& o = outcome.policies[i];
    ComparisonRow& r = rows[i];
    r.scenario = outcome.config.name;
    r.vehicle = outcome.config.vehicle.label;
    r.policy = o.policy;
    r.ok = o.ok();
    r.error = o.error;
    if (!r.ok) continue;
    const EnergyReport& e = *o.report;
    r.e_inst_j = e.e_inst;
    r.fuel_j = e.e_fuel;
    r.fuel_kj = e.e_fuel / 1000.0;
    r.co2_g = e.co2;
    if (o.policy == PolicyId::NoPeds) {
      r.pct_increase_vs_nopeds = 0.0;
    } else if (nopeds.ok()) {
      r.pct_increase_vs_nopeds = pct_increase(e.e_fuel, nopeds.report->e_fuel);
    }
    if (o.policy == PolicyId::SuddenStop) {
      r.pct_reduction_vs_suddenstop = 0.0;
    } else if (sudden.ok()) {
      r.pct_reduction_vs_suddenstop = pct_reduction(e.e_fuel, sudden.report->e_fuel);
    }
    r.modes = e.modes;
    r.mean_speed_mph = to_mph(e.mean_speed);
    r.speed_stddev_mph = to_mph(e.speed_stddev);
    r.trip_time_s = e.trip_time;
  }
  return rows;
}

/// Rows ordered by scenario (first appearance), then policy, then vehicle
/// (first appearance).
inline std::vector<ComparisonRow> order_rows(std::vector<ComparisonRow> rows) {
  std::vector<std::string> scenarios;
  std::vector<std::string> vehicles;
  auto index_of = [](std::vector<std::string>& seen, const std::string& key) {
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i] == key) return i;
    }
    seen.push_back(key);
    return seen.size() - 1;
  };
  for (const auto& r : rows) {
    index_of(scenarios, r.scenario);
    index_of(vehicles, r.vehicle);
  }
  std::stable_sort(rows.begin(), rows.end(), [&](const ComparisonRow& a, const ComparisonRow& b) {
    const auto ka = std::tuple(index_of(scenarios, a.scenario), static_cast<int>(a.policy), index_of(vehicles, a.vehicle));
    const auto kb = std::tuple(index_of(scenarios, b.scenario), static_cast<int>(b.policy), index_of(vehicles, b.vehicle));
    return ka < kb;
  });
  return rows;
}

/// Four rows (one per policy) for every config, percentages taken against the
/// same config's NoPeds and SuddenStop runs. Infeasible runs yield rows with
/// ok == false rather than aborting the suite.
inline std::vector<ComparisonRow> run_suite(std::span<const ScenarioConfig> configs) {
  std::vector<ComparisonRow> rows;
  rows.reserve(configs.size() * 4);
  for (const auto& c : configs) {
    for (auto& r : comparison_rows(evaluate_scenario(c))) rows.push_back(std::move(r));
  }
  return order_rows(std::move(rows));
}

}  // namespace midblock
