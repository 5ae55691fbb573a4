#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "midblock/errors.hpp"
#include "midblock/scenario.hpp"

// Scenario suite file (JSON). Every key in "defaults" may be repeated inside a
// scenario to override it for that scenario only; alert receipt time and
// crossing duration default to the crossing start and the scenario's
// crossing_duration_s. The suite expands to one resolved config per
// (scenario, vehicle) pair, scenario-major. See docs/config-format.md.

namespace midblock {

inline constexpr int kConfigFormatVersion = 1;

namespace detail {

using Json = nlohmann::json;

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

// Names end up in output file names.
inline void check_name(const std::string& name, const std::string& where) {
  const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
  if (!ok || name.find("__") != std::string::npos || name.front() == '.')
    throw ConfigError(where + ": name '" + name + "' must use [A-Za-z0-9._-] without '__'");
}

inline double number(const Json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing '" + key + "'");
  if (!it->is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return it->get<double>();
}

inline void maybe(const Json& obj, const std::string& key, double& out, const std::string& where) {
  if (obj.contains(key)) out = number(obj, key, where);
}

inline const std::set<std::string>& default_keys() {
  static const std::set<std::string> keys{"street_length_m",   "street_width_m",     "pedestrian_speed_mps",
                                          "crossing_duration_s", "v_max_mps",        "a_accel_mps2",
                                          "a_decel_mps2",      "a_emergency_mps2",   "dt_s",
                                          "accel_epsilon_mps2", "idle_speed_mps"};
  return keys;
}

inline void apply_defaults(const Json& obj, ScenarioConfig& c, const std::string& where) {
  maybe(obj, "street_length_m", c.street_length, where);
  maybe(obj, "street_width_m", c.street_width, where);
  maybe(obj, "pedestrian_speed_mps", c.pedestrian_speed, where);
  maybe(obj, "crossing_duration_s", c.crossing_duration, where);
  maybe(obj, "v_max_mps", c.limits.v_max, where);
  maybe(obj, "a_accel_mps2", c.limits.a_accel, where);
  maybe(obj, "a_decel_mps2", c.limits.a_decel, where);
  maybe(obj, "a_emergency_mps2", c.limits.a_emergency, where);
  maybe(obj, "dt_s", c.limits.dt, where);
  maybe(obj, "accel_epsilon_mps2", c.thresholds.accel_epsilon, where);
  maybe(obj, "idle_speed_mps", c.thresholds.idle_speed, where);
}

inline VehicleSpec parse_vehicle(const Json& obj, const std::string& where) {
  reject_unknown(obj, {"label", "mass_kg", "f0_n", "f2_n_s2_per_m2", "eta"}, where);
  VehicleSpec v;
  if (!obj.contains("label") || !obj["label"].is_string()) throw ConfigError(where + ": missing string 'label'");
  v.label = obj["label"].get<std::string>();
  check_name(v.label, where);
  v.mass = number(obj, "mass_kg", where);
  v.f0 = number(obj, "f0_n", where);
  v.f2 = number(obj, "f2_n_s2_per_m2", where);
  maybe(obj, "eta", v.eta, where);
  v.validate();
  return v;
}

inline Json vehicle_json(const VehicleSpec& v) {
  return {{"label", v.label}, {"mass_kg", v.mass}, {"f0_n", v.f0}, {"f2_n_s2_per_m2", v.f2}, {"eta", v.eta}};
}

}  // namespace detail

inline std::vector<ScenarioConfig> parse_suite_config(const std::string& text) {
  using detail::Json;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  detail::reject_unknown(root, {"format_version", "defaults", "vehicles", "scenarios"}, "config");
  if (!root.contains("format_version") || root["format_version"] != kConfigFormatVersion)
    throw ConfigError("config: format_version must be " + std::to_string(kConfigFormatVersion));

  ScenarioConfig base;
  if (root.contains("defaults")) {
    detail::reject_unknown(root["defaults"], detail::default_keys(), "defaults");
    detail::apply_defaults(root["defaults"], base, "defaults");
  }

  std::vector<VehicleSpec> vehicles;
  if (!root.contains("vehicles") || !root["vehicles"].is_array() || root["vehicles"].empty())
    throw ConfigError("config: 'vehicles' must be a non-empty array");
  for (std::size_t i = 0; i < root["vehicles"].size(); ++i)
    vehicles.push_back(detail::parse_vehicle(root["vehicles"][i], "vehicles[" + std::to_string(i) + "]"));

  if (!root.contains("scenarios") || !root["scenarios"].is_array() || root["scenarios"].empty())
    throw ConfigError("config: 'scenarios' must be a non-empty array");

  std::set<std::string> names;
  std::vector<ScenarioConfig> out;
  for (std::size_t i = 0; i < root["scenarios"].size(); ++i) {
    const Json& sj = root["scenarios"][i];
    const std::string where = "scenarios[" + std::to_string(i) + "]";
    auto allowed = detail::default_keys();
    allowed.insert({"name", "alerts"});
    detail::reject_unknown(sj, allowed, where);

    ScenarioConfig sc = base;
    if (!sj.contains("name") || !sj["name"].is_string()) throw ConfigError(where + ": missing string 'name'");
    sc.name = sj["name"].get<std::string>();
    detail::check_name(sc.name, where);
    if (!names.insert(sc.name).second) throw ConfigError(where + ": duplicate scenario name '" + sc.name + "'");
    detail::apply_defaults(sj, sc, where);

    if (!sj.contains("alerts") || !sj["alerts"].is_array()) throw ConfigError(where + ": 'alerts' must be an array");
    for (std::size_t k = 0; k < sj["alerts"].size(); ++k) {
      const Json& aj = sj["alerts"][k];
      const std::string aw = where + ".alerts[" + std::to_string(k) + "]";
      detail::reject_unknown(aj, {"location_m", "crossing_start_s", "receipt_time_s", "crossing_duration_s"}, aw);
      AlertSpec a;
      a.location = detail::number(aj, "location_m", aw);
      a.crossing_start = detail::number(aj, "crossing_start_s", aw);
      a.receipt_time = a.crossing_start;
      a.crossing_duration = sc.crossing_duration;
      detail::maybe(aj, "receipt_time_s", a.receipt_time, aw);
      detail::maybe(aj, "crossing_duration_s", a.crossing_duration, aw);
      sc.alerts.push_back(a);
    }

    for (const auto& v : vehicles) {
      ScenarioConfig c = sc;
      c.vehicle = v;
      c.validate();
      out.push_back(std::move(c));
    }
  }
  return out;
}

inline std::vector<ScenarioConfig> load_suite_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_suite_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// The six canonical scenarios for both EPA test cars.
inline std::vector<ScenarioConfig> default_suite() {
  std::vector<ScenarioConfig> out;
  for (const auto& sc : canonical_scenarios(ScenarioConfig{})) {
    for (const auto& v : {camry(), highlander()}) {
      ScenarioConfig c = sc;
      c.vehicle = v;
      out.push_back(std::move(c));
    }
  }
  return out;
}

/// Fully resolved form of a suite: every value explicit, keys sorted.
inline nlohmann::json resolved_json(const std::vector<ScenarioConfig>& configs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : configs) {
    nlohmann::json alerts = nlohmann::json::array();
    for (const auto& a : c.alerts) {
      alerts.push_back({{"location_m", a.location},
                        {"crossing_start_s", a.crossing_start},
                        {"receipt_time_s", a.receipt_time},
                        {"crossing_duration_s", a.crossing_duration}});
    }
    arr.push_back({{"name", c.name},
                   {"street_length_m", c.street_length},
                   {"street_width_m", c.street_width},
                   {"pedestrian_speed_mps", c.pedestrian_speed},
                   {"crossing_duration_s", c.crossing_duration},
                   {"v_max_mps", c.limits.v_max},
                   {"a_accel_mps2", c.limits.a_accel},
                   {"a_decel_mps2", c.limits.a_decel},
                   {"a_emergency_mps2", c.limits.a_emergency},
                   {"dt_s", c.limits.dt},
                   {"accel_epsilon_mps2", c.thresholds.accel_epsilon},
                   {"idle_speed_mps", c.thresholds.idle_speed},
                   {"vehicle", detail::vehicle_json(c.vehicle)},
                   {"alerts", alerts}});
  }
  return arr;
}

/// 64-bit FNV-1a over the resolved JSON, as 16 hex digits.
inline std::string config_digest(const std::vector<ScenarioConfig>& configs) {
  const std::string text = resolved_json(configs).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// A vehicle named "camry" or "highlander", or a path to a JSON file holding
/// one vehicle object.
inline VehicleSpec resolve_vehicle(const std::string& name_or_path) {
  if (name_or_path == "camry") return camry();
  if (name_or_path == "highlander") return highlander();
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("unknown vehicle '" + name_or_path + "' (expected camry, highlander or a spec file)");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return detail::parse_vehicle(nlohmann::json::parse(buf.str()), name_or_path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(name_or_path + ": " + e.what());
  }
}

}  // namespace midblock
