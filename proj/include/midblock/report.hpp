#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "midblock/energy.hpp"
#include "midblock/errors.hpp"
#include "midblock/scenario.hpp"

namespace midblock {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr std::string_view kComparisonHeader =
    "scenario,vehicle,policy,status,e_inst_j,fuel_j,fuel_kj,co2_g,pct_increase_vs_nopeds,"
    "pct_reduction_vs_suddenstop,accel_s,decel_s,cruise_s,idle_s,mean_speed_mph,speed_stddev_mph,trip_time_s,error";

namespace detail {

inline std::string format_metric(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Free text goes in the last column; commas and line breaks would break it.
inline std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

inline double parse_metric(std::string_view field, std::size_t line) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  return parse_field(field, line);
}

}  // namespace detail

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  using detail::format_metric;
  out << kComparisonHeader << '\n';
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.vehicle << ',' << to_string(r.policy) << ',' << (r.ok ? "ok" : "infeasible");
    if (r.ok) {
      for (double v : {r.e_inst_j, r.fuel_j, r.fuel_kj, r.co2_g, r.pct_increase_vs_nopeds,
                       r.pct_reduction_vs_suddenstop, r.modes.accelerating, r.modes.decelerating, r.modes.cruising,
                       r.modes.idling, r.mean_speed_mph, r.speed_stddev_mph, r.trip_time_s})
        out << ',' << format_metric(v);
    } else {
      out << std::string(13, ',');
    }
    out << ',' << detail::sanitize(r.error) << '\n';
  }
}

inline std::vector<ComparisonRow> read_comparison_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw SchemaError("empty comparison table", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kComparisonHeader) throw SchemaError("unexpected comparison table header", line_no);

  std::vector<ComparisonRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_commas(line);
    if (f.size() != 18) throw SchemaError("expected 18 columns, got " + std::to_string(f.size()), line_no);
    ComparisonRow r;
    r.scenario = std::string(f[0]);
    r.vehicle = std::string(f[1]);
    const auto policy = parse_policy(f[2]);
    if (!policy) throw SchemaError("unknown policy '" + std::string(f[2]) + "'", line_no);
    r.policy = *policy;
    if (f[3] != "ok" && f[3] != "infeasible") throw SchemaError("unknown status '" + std::string(f[3]) + "'", line_no);
    r.ok = f[3] == "ok";
    r.error = std::string(f[17]);
    if (r.ok) {
      double* targets[] = {&r.e_inst_j,           &r.fuel_j,
                           &r.fuel_kj,            &r.co2_g,
                           &r.pct_increase_vs_nopeds, &r.pct_reduction_vs_suddenstop,
                           &r.modes.accelerating, &r.modes.decelerating,
                           &r.modes.cruising,     &r.modes.idling,
                           &r.mean_speed_mph,     &r.speed_stddev_mph,
                           &r.trip_time_s};
      for (std::size_t i = 0; i < 13; ++i) *targets[i] = detail::parse_metric(f[4 + i], line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Percent increase over NoPeds, one row per (scenario, policy, vehicle),
/// computed for fuel and for CO2 separately.
inline void write_increase_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "scenario,policy,vehicle,pct_increase_fuel,pct_increase_co2\n";
  for (const auto& r : rows) {
    double fuel = std::numeric_limits<double>::quiet_NaN();
    double co2 = fuel;
    for (const auto& b : rows) {
      if (r.ok && b.ok && b.policy == PolicyId::NoPeds && b.scenario == r.scenario && b.vehicle == r.vehicle) {
        fuel = pct_increase(r.fuel_j, b.fuel_j);
        co2 = pct_increase(r.co2_g, b.co2_g);
      }
    }
    out << r.scenario << ',' << to_string(r.policy) << ',' << r.vehicle << ',' << detail::format_metric(fuel) << ','
        << detail::format_metric(co2) << '\n';
  }
}

inline void write_reduction_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "scenario,policy,vehicle,pct_reduction_fuel,pct_reduction_co2\n";
  for (const auto& r : rows) {
    double fuel = std::numeric_limits<double>::quiet_NaN();
    double co2 = fuel;
    for (const auto& b : rows) {
      if (r.ok && b.ok && b.policy == PolicyId::SuddenStop && b.scenario == r.scenario && b.vehicle == r.vehicle) {
        fuel = pct_reduction(r.fuel_j, b.fuel_j);
        co2 = pct_reduction(r.co2_g, b.co2_g);
      }
    }
    out << r.scenario << ',' << to_string(r.policy) << ',' << r.vehicle << ',' << detail::format_metric(fuel) << ','
        << detail::format_metric(co2) << '\n';
  }
}

/// Fixed-width table with the same columns as the CSV, rounded for reading.
inline void write_table(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %-10s %-10s %9s %8s %7s %7s %6s %6s %6s %6s %6s %6s %7s\n", "scenario",
                "vehicle", "policy", "fuel_kJ", "co2_g", "+%nop", "-%ss", "acc_s", "dec_s", "cru_s", "idl_s", "mph",
                "sd_mph", "trip_s");
  out << buf;
  for (const auto& r : rows) {
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "%-12s %-10s %-10s infeasible: %s\n", r.scenario.c_str(), r.vehicle.c_str(),
                    std::string(to_string(r.policy)).c_str(), r.error.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%-12s %-10s %-10s %9.2f %8.2f %7.2f %7.2f %6.1f %6.1f %6.1f %6.1f %6.2f %6.2f %7.1f\n",
                    r.scenario.c_str(), r.vehicle.c_str(), std::string(to_string(r.policy)).c_str(), r.fuel_kj,
                    r.co2_g, r.pct_increase_vs_nopeds, r.pct_reduction_vs_suddenstop, r.modes.accelerating,
                    r.modes.decelerating, r.modes.cruising, r.modes.idling, r.mean_speed_mph, r.speed_stddev_mph,
                    r.trip_time_s);
    }
    out << buf;
  }
}

/// One line of JSON for machines. Keys are sorted, doubles round-trip.
inline std::string energy_record(const EnergyReport& r, const VehicleSpec& spec) {
  nlohmann::json j{{"vehicle", spec.label},
                   {"eta", spec.eta},
                   {"e_inst_j", r.e_inst},
                   {"e_fuel_j", r.e_fuel},
                   {"e_fuel_kj", r.e_fuel / 1000.0},
                   {"co2_g", r.co2},
                   {"accel_s", r.modes.accelerating},
                   {"decel_s", r.modes.decelerating},
                   {"cruise_s", r.modes.cruising},
                   {"idle_s", r.modes.idling},
                   {"mean_speed_mps", r.mean_speed},
                   {"mean_speed_mph", to_mph(r.mean_speed)},
                   {"speed_stddev_mps", r.speed_stddev},
                   {"speed_stddev_mph", to_mph(r.speed_stddev)},
                   {"trip_time_s", r.trip_time}};
  return j.dump();
}

inline void write_energy_block(std::ostream& out, const EnergyReport& r, const VehicleSpec& spec) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "vehicle            %s (eta %.3g)\n"
                "wheel energy       %.3f kJ\n"
                "fuel energy        %.3f kJ\n"
                "CO2                %.3f g\n"
                "accelerating       %.1f s\n"
                "decelerating       %.1f s\n"
                "cruising           %.1f s\n"
                "idling             %.1f s\n"
                "mean speed         %.2f mph (%.3f m/s)\n"
                "speed std dev      %.2f mph (%.3f m/s)\n"
                "trip time          %.1f s\n",
                spec.label.c_str(), spec.eta, r.e_inst / 1000.0, r.e_fuel / 1000.0, r.co2, r.modes.accelerating,
                r.modes.decelerating, r.modes.cruising, r.modes.idling, to_mph(r.mean_speed), r.mean_speed,
                to_mph(r.speed_stddev), r.speed_stddev, r.trip_time);
  out << buf;
}

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_digest;
  std::string timestamp;
  std::vector<std::string> output_paths;
};

/// UTC ISO-8601 time from SOURCE_DATE_EPOCH, or the Unix epoch when unset,
/// so repeated runs write identical manifests.
inline std::string manifest_timestamp() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == nullptr || *end != '\0') throw ConfigError("SOURCE_DATE_EPOCH must be an integer");
    t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool_version"] = m.tool_version;
  j["config_digest"] = m.config_digest;
  j["timestamp"] = m.timestamp;
  j["output_paths"] = m.output_paths;
  return j.dump(2) + "\n";
}

}  // namespace midblock
