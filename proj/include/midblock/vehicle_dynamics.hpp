#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "midblock/errors.hpp"

namespace midblock {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Longitudinal resistance model of a car: mass plus the rolling (f0) and
/// aerodynamic (f2) coefficients of the road-load power polynomial, and the
/// fraction `eta` of fuel energy that reaches the wheels.
struct VehicleSpec {
  std::string label;
  double mass = 0.0;  // kg
  double f0 = 0.0;    // N
  double f2 = 0.0;    // N s^2 / m^2
  double eta = 0.21;

  void validate() const {
    if (!(mass > 0.0)) throw ConfigError("vehicle '" + label + "': mass must be > 0");
    if (!(f0 >= 0.0)) throw ConfigError("vehicle '" + label + "': f0 must be >= 0");
    if (!(f2 >= 0.0)) throw ConfigError("vehicle '" + label + "': f2 must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("vehicle '" + label + "': eta must be in (0, 1]");
  }

  friend bool operator==(const VehicleSpec&, const VehicleSpec&) = default;
};

// 2023 EPA test-car coefficients.
inline VehicleSpec camry() { return {"camry", 1644.0, 113.82, 0.36, 0.21}; }
inline VehicleSpec highlander() { return {"highlander", 2040.8, 139.7, 0.56, 0.21}; }

struct KinematicLimits {
  double v_max = 13.4;       // m/s, street speed limit
  double a_accel = 2.6;      // m/s^2
  double a_decel = 4.5;      // m/s^2, comfort braking magnitude
  double a_emergency = 9.0;  // m/s^2, hard braking magnitude
  double dt = 0.5;           // s

  void validate() const {
    if (!(v_max > 0.0)) throw ConfigError("v_max must be > 0");
    if (!(a_accel > 0.0)) throw ConfigError("a_accel must be > 0");
    if (!(a_decel > 0.0)) throw ConfigError("a_decel must be > 0");
    if (!(a_emergency >= a_decel)) throw ConfigError("a_emergency must be >= a_decel");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  }

  friend bool operator==(const KinematicLimits&, const KinematicLimits&) = default;
};

/// One simulation step. `accel` is the acceleration applied over the interval
/// [t, t + dt) that starts at this sample.
struct TrajectorySample {
  double t = 0.0;
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.5;
  double street_length = 0.0;

  double trip_time() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Integrates one step of constant acceleration. A step that would drive the
/// speed negative stops the car at the zero crossing and holds it there for
/// the rest of the step. The returned sample has accel = 0; the caller records
/// the applied acceleration on the source sample.
inline TrajectorySample advance(const TrajectorySample& state, double accel, double dt) {
  TrajectorySample next{state.t + dt, state.position, state.speed, 0.0};
  const double v_end = state.speed + accel * dt;
  if (v_end >= 0.0) {
    next.position += state.speed * dt + 0.5 * accel * dt * dt;
    next.speed = v_end;
  } else {
    const double moving = -state.speed / accel;
    next.position += state.speed * moving + 0.5 * accel * moving * moving;
    next.speed = 0.0;
  }
  return next;
}

inline double braking_distance(double v, double a_brake) { return v * v / (2.0 * a_brake); }

/// A speed set-point approached at bounded rates. Every controller in the
/// library expresses its per-step decision as one of these.
struct SpeedPlan {
  double target_speed = 0.0;
  double accel_rate = 0.0;
  double decel_rate = 0.0;
};

inline double plan_accel(const SpeedPlan& plan, double speed, double dt) {
  return std::clamp((plan.target_speed - speed) / dt, -plan.decel_rate, plan.accel_rate);
}

/// Advances `state` one step under `plan`, writing the applied acceleration
/// into `state.accel`. When the set-point is reachable within the step the
/// speed lands on it exactly, so cruising segments carry accel == 0.
inline TrajectorySample step_toward(TrajectorySample& state, const SpeedPlan& plan, double dt) {
  const double a = plan_accel(plan, state.speed, dt);
  state.accel = a;
  TrajectorySample next = advance(state, a, dt);
  if (a > -plan.decel_rate && a < plan.accel_rate) next.speed = std::max(plan.target_speed, 0.0);
  return next;
}

/// Time offset within the step starting at `from` (with its recorded accel)
/// at which the car reaches `target`. Assumes the step does reach it.
inline double step_crossing_time(const TrajectorySample& from, double target) {
  const double gap = target - from.position;
  if (gap <= 0.0) return 0.0;
  const double disc = from.speed * from.speed + 2.0 * from.accel * gap;
  const double root = std::sqrt(std::max(disc, 0.0));
  const double denom = from.speed + root;
  if (denom <= 0.0) return kInfinity;
  return 2.0 * gap / denom;
}

/// Earliest time at which the car reaches `target` when following `plan` from
/// `state`; +inf if it comes to rest first.
inline double time_to_reach(TrajectorySample state, double target, const SpeedPlan& plan, double dt) {
  if (state.position >= target) return state.t;
  for (;;) {
    const double a = plan_accel(plan, state.speed, dt);
    if (a == 0.0) {
      if (state.speed <= 0.0) return kInfinity;
      return state.t + (target - state.position) / state.speed;
    }
    if (state.speed <= 0.0 && a < 0.0) return kInfinity;
    TrajectorySample next = step_toward(state, plan, dt);
    if (next.position >= target) return state.t + step_crossing_time(state, target);
    if (next.speed <= 0.0 && plan.target_speed <= 0.0) return kInfinity;
    state = next;
  }
}

/// Earliest time at which a recorded trajectory reaches `target`, solving the
/// constant-acceleration motion inside the step that crosses it.
inline double time_to_reach(std::span<const TrajectorySample> samples, double target) {
  if (samples.empty()) return kInfinity;
  if (samples.front().position >= target) return samples.front().t;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    if (samples[k + 1].position >= target) return samples[k].t + step_crossing_time(samples[k], target);
  }
  return kInfinity;
}

/// Position reached at time `t`, interpolated with the step's kinematics.
inline double position_at(std::span<const TrajectorySample> samples, double t) {
  if (samples.empty()) return 0.0;
  if (t <= samples.front().t) return samples.front().position;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    if (t < samples[k + 1].t) {
      const double tau = t - samples[k].t;
      const auto& s = samples[k];
      return advance(s, s.accel, tau).position;
    }
  }
  return samples.back().position;
}

}  // namespace midblock
