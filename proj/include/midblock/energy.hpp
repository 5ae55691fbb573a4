#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "midblock/errors.hpp"
#include "midblock/vehicle_dynamics.hpp"

namespace midblock {

// CO2 per unit of fuel energy: carbon content (g/kJ) x oxidised fraction x
// molecular mass ratio of CO2 to carbon.
inline constexpr double kCarbonContent = 0.0196;
inline constexpr double kOxidationFraction = 0.99;
inline constexpr double kCo2PerCarbon = 44.0 / 12.0;
inline constexpr double kCo2GramsPerKj = kCarbonContent * kOxidationFraction * kCo2PerCarbon;

inline double co2_grams(double fuel_energy_joules) { return fuel_energy_joules / 1000.0 * kCo2GramsPerKj; }

struct ModeThresholds {
  double accel_epsilon = 0.05;  // m/s^2, |a| at or below this is cruising
  double idle_speed = 0.1;      // m/s, at or below this the engine is off

  void validate() const {
    if (!(accel_epsilon > 0.0) || !(idle_speed > 0.0)) throw ConfigError("mode thresholds must be > 0");
  }

  friend bool operator==(const ModeThresholds&, const ModeThresholds&) = default;
};

struct ModeDurations {
  double accelerating = 0.0;
  double decelerating = 0.0;
  double cruising = 0.0;
  double idling = 0.0;

  double total() const { return accelerating + decelerating + cruising + idling; }
  friend bool operator==(const ModeDurations&, const ModeDurations&) = default;
};

struct EnergyReport {
  double e_inst = 0.0;  // J at the wheels
  double e_fuel = 0.0;  // J of fuel
  double co2 = 0.0;     // g
  ModeDurations modes;
  double mean_speed = 0.0;    // m/s
  double speed_stddev = 0.0;  // m/s
  double trip_time = 0.0;     // s

  friend bool operator==(const EnergyReport&, const EnergyReport&) = default;
};

/// Tractive power demand. Braking and standing still draw nothing.
inline double instantaneous_power(const VehicleSpec& spec, double v, double a, const ModeThresholds& th = {}) {
  if (a < -th.accel_epsilon || v <= th.idle_speed) return 0.0;
  return spec.mass * a * v + spec.f0 * v + spec.f2 * v * v * v;
}

enum class DrivingMode { Accelerating, Decelerating, Cruising, Idling };

inline DrivingMode classify(double v, double a, const ModeThresholds& th = {}) {
  if (a > th.accel_epsilon) return DrivingMode::Accelerating;
  if (a < -th.accel_epsilon) return DrivingMode::Decelerating;
  return v > th.idle_speed ? DrivingMode::Cruising : DrivingMode::Idling;
}

inline void check_uniform_step(const Trajectory& traj) {
  const auto& s = traj.samples;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (std::abs(s[k + 1].t - s[k].t - traj.dt) > 1e-9)
      throw NonUniformStep("sample spacing at t=" + std::to_string(s[k].t) + " differs from dt=" +
                           std::to_string(traj.dt));
  }
}

/// Each sample stands for the step it starts; the final sample closes the
/// trip and contributes no energy or mode time. Speed statistics are taken
/// over every sample (population standard deviation).
inline EnergyReport energy_of(const Trajectory& traj, const VehicleSpec& spec, const ModeThresholds& th = {}) {
  if (traj.samples.empty()) throw Error("energy_of: empty trajectory");
  spec.validate();
  check_uniform_step(traj);

  EnergyReport r;
  const auto& s = traj.samples;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    r.e_inst += instantaneous_power(spec, s[k].speed, s[k].accel, th) * traj.dt;
    switch (classify(s[k].speed, s[k].accel, th)) {
      case DrivingMode::Accelerating: r.modes.accelerating += traj.dt; break;
      case DrivingMode::Decelerating: r.modes.decelerating += traj.dt; break;
      case DrivingMode::Cruising: r.modes.cruising += traj.dt; break;
      case DrivingMode::Idling: r.modes.idling += traj.dt; break;
    }
  }
  r.e_fuel = r.e_inst / spec.eta;
  r.co2 = co2_grams(r.e_fuel);

  double sum = 0.0;
  for (const auto& x : s) sum += x.speed;
  r.mean_speed = sum / static_cast<double>(s.size());
  double var = 0.0;
  for (const auto& x : s) var += (x.speed - r.mean_speed) * (x.speed - r.mean_speed);
  r.speed_stddev = std::sqrt(var / static_cast<double>(s.size()));
  r.trip_time = traj.trip_time();
  return r;
}

// ---------------------------------------------------------------------------
// Trajectory CSV: header `time_s,speed_mps` or `time_s,speed_mps,accel_mps2`.

inline constexpr std::string_view kCsvHeader = "time_s,speed_mps";
inline constexpr std::string_view kCsvHeaderWithAccel = "time_s,speed_mps,accel_mps2";

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_field(std::string_view field, std::size_t line) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
    throw SchemaError("not a number: '" + std::string(field) + "'", line);
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses a trajectory CSV. Positions are rebuilt by integrating the profile
/// from 0; a missing acceleration column is back-filled by forward
/// differences (the final row gets 0).
inline Trajectory ingest_trajectory(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw SchemaError("empty input: missing header", 0);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  bool has_accel = false;
  if (line == kCsvHeaderWithAccel) {
    has_accel = true;
  } else if (line != kCsvHeader) {
    throw SchemaError("header must be '" + std::string(kCsvHeader) + "' or '" + std::string(kCsvHeaderWithAccel) +
                          "', got '" + line + "'",
                      line_no);
  }
  const std::size_t columns = has_accel ? 3 : 2;

  Trajectory traj;
  std::vector<std::size_t> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() != columns)
      throw SchemaError("expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size()),
                        line_no);
    TrajectorySample s;
    s.t = detail::parse_field(fields[0], line_no);
    s.speed = detail::parse_field(fields[1], line_no);
    if (has_accel) s.accel = detail::parse_field(fields[2], line_no);
    if (s.speed < 0.0) throw ValueError("negative speed", line_no);
    if (!traj.samples.empty() && !(s.t > traj.samples.back().t)) throw MonotonicityError("time not increasing", line_no);
    traj.samples.push_back(s);
    rows.push_back(line_no);
  }
  if (traj.samples.size() < 2) throw SchemaError("need at least two data rows", line_no);

  auto& s = traj.samples;
  traj.dt = s[1].t - s[0].t;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    if (std::abs(s[k + 1].t - s[k].t - traj.dt) > 1e-9)
      throw NonUniformStep("line " + std::to_string(rows[k + 1]) + ": non-uniform time step");
  }
  if (!has_accel) {
    for (std::size_t k = 0; k + 1 < s.size(); ++k) s[k].accel = (s[k + 1].speed - s[k].speed) / traj.dt;
    s.back().accel = 0.0;
  }
  for (std::size_t k = 0; k + 1 < s.size(); ++k) s[k + 1].position = advance(s[k], s[k].accel, traj.dt).position;
  traj.street_length = s.back().position;
  return traj;
}

/// Writes the trajectory with round-trip precision, acceleration included.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kCsvHeaderWithAccel << '\n';
  for (const auto& s : traj.samples) {
    out << detail::format_double(s.t) << ',' << detail::format_double(s.speed) << ','
        << detail::format_double(s.accel) << '\n';
  }
}

}  // namespace midblock
