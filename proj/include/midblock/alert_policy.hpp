#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "midblock/errors.hpp"
#include "midblock/vehicle_dynamics.hpp"

namespace midblock {

enum class PolicyId { Option1, Option2, NoPeds, SuddenStop };

inline constexpr std::array<PolicyId, 4> kAllPolicies{PolicyId::Option1, PolicyId::Option2, PolicyId::NoPeds,
                                                      PolicyId::SuddenStop};

inline std::string_view to_string(PolicyId p) {
  switch (p) {
    case PolicyId::Option1: return "Option1";
    case PolicyId::Option2: return "Option2";
    case PolicyId::NoPeds: return "NoPeds";
    case PolicyId::SuddenStop: return "SuddenStop";
  }
  return "?";
}

inline std::optional<PolicyId> parse_policy(std::string_view name) {
  for (PolicyId p : kAllPolicies) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

/// A crossing alert as received by the car: the cohort crosses at `location`
/// and will be clear of the road at `crossing_end`.
struct AlertEvent {
  int ordinal = 1;
  double receipt_time = 0.0;
  double location = 0.0;
  double crossing_end = 0.0;
  double crossing_start = 0.0;
  double pedestrian_speed = 0.67;
  double street_width = 13.0;

  // Quoted crossing times are whole seconds (13 m at 0.67 m/s is quoted as
  // 20 s), so the remaining time is bounded by the rounded-up figure.
  double full_crossing_time() const { return std::ceil(street_width / pedestrian_speed - 1e-9); }

  void validate(double street_length) const {
    const std::string tag = "alert " + std::to_string(ordinal) + ": ";
    if (!(crossing_end > receipt_time)) throw MalformedScenario(tag + "crossing end must be after receipt time");
    if (!(pedestrian_speed > 0.0) || !(street_width > 0.0))
      throw MalformedScenario(tag + "pedestrian speed and street width must be positive");
    if (crossing_end - receipt_time > full_crossing_time() + 1e-9)
      throw MalformedScenario(tag + "remaining crossing time exceeds full crossing time");
    if (receipt_time < crossing_start - 1e-9) throw MalformedScenario(tag + "alert received before crossing starts");
    if (location < 0.0 || location > street_length)
      throw MalformedScenario(tag + "crossing location outside the street");
  }

  friend bool operator==(const AlertEvent&, const AlertEvent&) = default;
};

enum class ConstraintStatus { Pending, Governing, Passed };

struct ActiveConstraint {
  AlertEvent alert;
  double v_safe = 0.0;
  ConstraintStatus status = ConstraintStatus::Pending;
};

/// Maximum speed at which the car, at `car_position` at time `now`, reaches
/// the crossing no earlier than the crossing ends, chained with the previous
/// limit. Finished or already-passed crossings leave `prev_v_safe` unchanged.
inline double safe_speed(double prev_v_safe, double car_position, const AlertEvent& alert, double now) {
  if (now >= alert.crossing_end || car_position >= alert.location) return prev_v_safe;
  return std::min(prev_v_safe, (alert.location - car_position) / (alert.crossing_end - now));
}

enum class Arbitration { AdoptDirectly, MustDecelerateNow, MayDefer };

inline std::string_view to_string(Arbitration a) {
  switch (a) {
    case Arbitration::AdoptDirectly: return "AdoptDirectly";
    case Arbitration::MustDecelerateNow: return "MustDecelerateNow";
    case Arbitration::MayDefer: return "MayDefer";
  }
  return "?";
}

/// Location rule: a nearer (or equally near) incoming crossing must be honoured
/// now; a farther one may wait until the current one is behind the car.
inline Arbitration arbitrate(const ActiveConstraint* current, const AlertEvent& incoming, double /*car_position*/) {
  if (current == nullptr) return Arbitration::AdoptDirectly;
  return incoming.location <= current->alert.location ? Arbitration::MustDecelerateNow : Arbitration::MayDefer;
}

/// Location rule plus speed check: a farther crossing that does not pull the
/// speed below `setpoint` leaves nothing to defer.
inline Arbitration arbitrate(const ActiveConstraint* current, const AlertEvent& incoming, double car_position,
                             double now, double setpoint) {
  const Arbitration by_location = arbitrate(current, incoming, car_position);
  if (by_location == Arbitration::MayDefer && safe_speed(setpoint, car_position, incoming, now) >= setpoint)
    return Arbitration::AdoptDirectly;
  return by_location;
}

enum class ConstraintEvent { Adopted, Deferred, Promoted, Passed, Expired, Perceived, Stopped, Resumed };

inline std::string_view to_string(ConstraintEvent e) {
  switch (e) {
    case ConstraintEvent::Adopted: return "adopted";
    case ConstraintEvent::Deferred: return "deferred";
    case ConstraintEvent::Promoted: return "promoted";
    case ConstraintEvent::Passed: return "passed";
    case ConstraintEvent::Expired: return "expired";
    case ConstraintEvent::Perceived: return "perceived";
    case ConstraintEvent::Stopped: return "stopped";
    case ConstraintEvent::Resumed: return "resumed";
  }
  return "?";
}

struct ConstraintRecord {
  double t = 0.0;
  int ordinal = 0;
  ConstraintEvent event = ConstraintEvent::Adopted;
  double v_safe = 0.0;
  std::optional<Arbitration> decision;

  friend bool operator==(const ConstraintRecord&, const ConstraintRecord&) = default;
};

struct PolicyRun {
  PolicyId policy = PolicyId::NoPeds;
  std::vector<AlertEvent> alerts;
  Trajectory trajectory;
  std::vector<ConstraintRecord> history;
};

namespace detail {

inline constexpr double kTimeEps = 1e-9;

/// Option 1 / Option 2 controller. Plans are only recomputed at events
/// (alert adopted, crossing passed, crossing finished, deferral released);
/// between events the car follows the last plan.
class InformedController {
 public:
  InformedController(PolicyId policy, std::vector<AlertEvent> alerts, const KinematicLimits& limits,
                     double street_length)
      : policy_(policy),
        limits_(limits),
        street_length_(street_length),
        alerts_(std::move(alerts)),
        plan_{limits.v_max, limits.a_accel, limits.a_decel} {}

  SpeedPlan next(const TrajectorySample& s) {
    for (auto& c : tracked_) {
      if (c.passed) continue;
      if (s.position >= c.constraint.alert.location) {
        c.passed = true;
        c.constraint.status = ConstraintStatus::Passed;
        record(s.t, c, ConstraintEvent::Passed);
        dirty_ = dirty_ || c.adopted;
        continue;
      }
      if (!c.expired && s.t >= c.constraint.alert.crossing_end) {
        c.expired = true;
        record(s.t, c, ConstraintEvent::Expired);
        dirty_ = dirty_ || c.adopted;
      }
    }

    for (auto& c : tracked_) {
      if (!c.deferred || c.passed) continue;
      const Tracked* ref = find(c.deferred_behind);
      if (ref == nullptr || ref->passed || ref->expired) {
        c.deferred = false;
        c.adopted = true;
        record(s.t, c, ConstraintEvent::Promoted);
        dirty_ = true;
      }
    }

    while (accept_new_ && next_alert_ < alerts_.size() && alerts_[next_alert_].receipt_time <= s.t + kTimeEps) {
      receive(s, alerts_[next_alert_++]);
    }

    if (dirty_) replan(s);
    return plan_;
  }

  std::vector<ConstraintRecord> take_history() { return std::move(history_); }

 private:
  struct Tracked {
    ActiveConstraint constraint;
    bool adopted = false;
    bool deferred = false;
    bool passed = false;
    bool expired = false;
    int deferred_behind = 0;

    bool live() const { return !passed && !expired; }
  };

  const Tracked* find(int ordinal) const {
    for (const auto& c : tracked_) {
      if (c.constraint.alert.ordinal == ordinal) return &c;
    }
    return nullptr;
  }

  void record(double t, const Tracked& c, ConstraintEvent e, std::optional<Arbitration> d = std::nullopt) {
    history_.push_back({t, c.constraint.alert.ordinal, e, c.constraint.v_safe, d});
  }

  void receive(const TrajectorySample& s, const AlertEvent& alert) {
    Tracked c;
    c.constraint.alert = alert;
    c.constraint.v_safe = safe_speed(plan_.target_speed, s.position, alert, s.t);
    if (s.position >= alert.location) {
      c.passed = true;
      c.constraint.status = ConstraintStatus::Passed;
      tracked_.push_back(c);
      record(s.t, c, ConstraintEvent::Passed);
      return;
    }

    const Tracked* nearest = nullptr;
    for (const auto& t : tracked_) {
      if (t.live() && (nearest == nullptr || t.constraint.alert.location < nearest->constraint.alert.location))
        nearest = &t;
    }
    const Arbitration decision =
        arbitrate(nearest ? &nearest->constraint : nullptr, alert, s.position, s.t, plan_.target_speed);

    if (policy_ == PolicyId::Option2 && decision == Arbitration::MayDefer) {
      c.deferred = true;
      c.deferred_behind = nearest->constraint.alert.ordinal;
      if (deferral_feasible(s, c)) {
        tracked_.push_back(c);
        record(s.t, c, ConstraintEvent::Deferred, decision);
        return;
      }
      c.deferred = false;
    }
    c.adopted = true;
    tracked_.push_back(c);
    record(s.t, c, ConstraintEvent::Adopted, decision);
    dirty_ = true;
  }

  // Deferring is only worth it if comfort braking still honours the crossing
  // once the nearer one is out of the way. Dry-runs a copy of this controller.
  bool deferral_feasible(const TrajectorySample& s, const Tracked& candidate) const {
    InformedController probe = *this;
    probe.accept_new_ = false;
    probe.tracked_.push_back(candidate);
    const int ordinal = candidate.constraint.alert.ordinal;
    TrajectorySample state = s;
    const std::size_t max_steps = static_cast<std::size_t>(1e6);
    for (std::size_t k = 0; k < max_steps && state.position < street_length_; ++k) {
      SpeedPlan plan;
      try {
        plan = probe.next(state);
      } catch (const InfeasibleConstraint&) {
        return false;
      }
      const Tracked* c = probe.find(ordinal);
      if (c->adopted) return !probe.last_replan_emergency_;
      state = step_toward(state, plan, limits_.dt);
    }
    return true;
  }

  bool reaches_after_end(const TrajectorySample& s, const AlertEvent& a, double target, double decel) const {
    const SpeedPlan plan{target, limits_.a_accel, decel};
    return time_to_reach(s, a.location, plan, limits_.dt) >= a.crossing_end;
  }

  // Highest set-point, no faster than the safe speed, whose braking transient
  // still gets the car to the crossing no earlier than it ends.
  std::pair<double, double> plan_for(const TrajectorySample& s, const AlertEvent& a) const {
    const double v_hi = std::min(limits_.v_max, safe_speed(limits_.v_max, s.position, a, s.t));
    for (double decel : {limits_.a_decel, limits_.a_emergency}) {
      if (reaches_after_end(s, a, v_hi, decel)) return {v_hi, decel};
      if (!reaches_after_end(s, a, 0.0, decel)) continue;
      double lo = 0.0;
      double hi = v_hi;
      for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reaches_after_end(s, a, mid, decel) ? lo : hi) = mid;
      }
      return {lo, decel};
    }
    throw InfeasibleConstraint("alert " + std::to_string(a.ordinal) + ": crossing at " +
                               std::to_string(a.location) + " m cannot be reached after it ends, even braking at " +
                               std::to_string(limits_.a_emergency) + " m/s^2");
  }

  void replan(const TrajectorySample& s) {
    dirty_ = false;
    double target = limits_.v_max;
    double decel = limits_.a_decel;
    Tracked* governing = nullptr;
    for (auto& c : tracked_) {
      if (!c.adopted || !c.live()) continue;
      c.constraint.status = ConstraintStatus::Pending;
      const auto [v, rate] = plan_for(s, c.constraint.alert);
      if (v < target) {
        target = v;
        governing = &c;
      }
      decel = std::max(decel, rate);
    }
    if (governing) governing->constraint.status = ConstraintStatus::Governing;
    last_replan_emergency_ = decel > limits_.a_decel;
    plan_ = {target, limits_.a_accel, decel};
  }

  PolicyId policy_;
  KinematicLimits limits_;
  double street_length_;
  std::vector<AlertEvent> alerts_;
  std::size_t next_alert_ = 0;
  bool accept_new_ = true;
  bool dirty_ = false;
  bool last_replan_emergency_ = false;
  SpeedPlan plan_;
  std::vector<Tracked> tracked_;
  std::vector<ConstraintRecord> history_;
};

/// Uninformed driver: sees a crossing only once it is within emergency
/// braking range, stops short of it, waits for the road to clear, resumes.
class SuddenStopController {
 public:
  static constexpr double kStandoff = 1.0;  // m short of the crossing line

  SuddenStopController(std::vector<AlertEvent> alerts, const KinematicLimits& limits)
      : limits_(limits), alerts_(std::move(alerts)) {}

  SpeedPlan next(const TrajectorySample& s) {
    const SpeedPlan cruise{limits_.v_max, limits_.a_accel, limits_.a_decel};
    if (mode_ != Mode::Driving) {
      const AlertEvent& c = alerts_[target_];
      if (s.t >= c.crossing_end) {
        mode_ = Mode::Driving;
        record(s.t, c, ConstraintEvent::Resumed);
      } else if (mode_ == Mode::Braking && s.speed <= 0.0) {
        mode_ = Mode::Stopped;
        record(s.t, c, ConstraintEvent::Stopped);
      }
      if (mode_ == Mode::Braking) return brake_plan(s, c);
      if (mode_ == Mode::Stopped) return {0.0, limits_.a_accel, limits_.a_decel};
    }

    const std::size_t nearest = nearest_active(s);
    if (nearest == alerts_.size()) return cruise;
    const AlertEvent& c = alerts_[nearest];
    TrajectorySample probe = s;
    const TrajectorySample ahead = step_toward(probe, cruise, limits_.dt);
    if (stop_decel(ahead.speed, c.location - kStandoff - ahead.position) <= limits_.a_emergency) return cruise;

    const double gap = c.location - kStandoff - s.position;
    if (s.speed > 0.0 && stop_decel(s.speed, gap) > limits_.a_emergency * (1.0 + 1e-9))
      throw InfeasibleConstraint("alert " + std::to_string(c.ordinal) + ": crossing at " +
                                 std::to_string(c.location) + " m became active inside emergency braking range");
    mode_ = Mode::Braking;
    target_ = nearest;
    record(s.t, c, ConstraintEvent::Perceived);
    return brake_plan(s, c);
  }

  std::vector<ConstraintRecord> take_history() { return std::move(history_); }

 private:
  enum class Mode { Driving, Braking, Stopped };

  std::size_t nearest_active(const TrajectorySample& s) const {
    std::size_t best = alerts_.size();
    for (std::size_t i = 0; i < alerts_.size(); ++i) {
      const auto& a = alerts_[i];
      if (a.location <= s.position || s.t < a.crossing_start || s.t >= a.crossing_end) continue;
      if (best == alerts_.size() || a.location < alerts_[best].location) best = i;
    }
    return best;
  }

  // Deceleration for this step of a profile that comes to rest exactly at the
  // standoff point on a step boundary: x = 2 gap / (v dt) is the stop time in
  // steps under constant braking, N = ceil(x) steps are used, N - 1 of them at
  // a common rate and the last one taking the remaining speed to zero.
  double stop_decel(double v, double gap) const {
    if (v <= 0.0) return 0.0;
    if (gap <= 0.0) return kInfinity;
    const double dt = limits_.dt;
    const double x = 2.0 * gap / (v * dt);
    const double n = std::max(1.0, std::ceil(x - 1e-9));
    if (n == 1.0) return v / dt;
    return v * (2.0 * n - 1.0 - x) / (n * (n - 1.0) * dt);
  }

  SpeedPlan brake_plan(const TrajectorySample& s, const AlertEvent& c) const {
    const double gap = c.location - kStandoff - s.position;
    if (gap <= 1e-12) return {0.0, limits_.a_accel, kInfinity};
    return {0.0, limits_.a_accel, stop_decel(s.speed, gap)};
  }

  void record(double t, const AlertEvent& a, ConstraintEvent e) { history_.push_back({t, a.ordinal, e, 0.0, {}}); }

  KinematicLimits limits_;
  std::vector<AlertEvent> alerts_;
  Mode mode_ = Mode::Driving;
  std::size_t target_ = 0;
  std::vector<ConstraintRecord> history_;
};

class CruiseController {
 public:
  explicit CruiseController(const KinematicLimits& limits) : plan_{limits.v_max, limits.a_accel, limits.a_decel} {}
  SpeedPlan next(const TrajectorySample&) const { return plan_; }
  std::vector<ConstraintRecord> take_history() { return {}; }

 private:
  SpeedPlan plan_;
};

inline void validate_alerts(const std::vector<AlertEvent>& alerts, double street_length) {
  for (std::size_t i = 0; i < alerts.size(); ++i) {
    alerts[i].validate(street_length);
    if (i > 0 && alerts[i].receipt_time < alerts[i - 1].receipt_time)
      throw MalformedScenario("alerts must be sorted by receipt time");
  }
}

}  // namespace detail

/// Drives one policy from the street entry (position 0, speed v_max, t = 0)
/// until the car clears `street_length`.
inline PolicyRun run_policy(PolicyId policy, const std::vector<AlertEvent>& alerts, const KinematicLimits& limits,
                            double street_length) {
  limits.validate();
  if (!(street_length > 0.0)) throw ConfigError("street length must be > 0");
  detail::validate_alerts(alerts, street_length);

  using Controller =
      std::variant<detail::InformedController, detail::SuddenStopController, detail::CruiseController>;
  Controller controller = [&]() -> Controller {
    switch (policy) {
      case PolicyId::Option1:
      case PolicyId::Option2: return detail::InformedController(policy, alerts, limits, street_length);
      case PolicyId::SuddenStop: return detail::SuddenStopController(alerts, limits);
      case PolicyId::NoPeds: break;
    }
    return detail::CruiseController(limits);
  }();

  PolicyRun run;
  run.policy = policy;
  run.alerts = alerts;
  run.trajectory.dt = limits.dt;
  run.trajectory.street_length = street_length;

  // Slowest admissible progress bounds the loop: every crossing ends within
  // its full crossing time of its receipt.
  double horizon = street_length / limits.v_max;
  for (const auto& a : alerts) horizon += a.crossing_end - std::min(a.receipt_time, a.crossing_start) + 1.0;
  const auto max_steps = static_cast<std::size_t>(std::ceil(4.0 * horizon / limits.dt)) + 1000;

  TrajectorySample s{0.0, 0.0, limits.v_max, 0.0};
  std::size_t k = 0;
  while (s.position < street_length) {
    if (k >= max_steps) throw Error(std::string(to_string(policy)) + ": car did not clear the street");
    const SpeedPlan plan = std::visit([&](auto& c) { return c.next(s); }, controller);
    TrajectorySample next = step_toward(s, plan, limits.dt);
    run.trajectory.samples.push_back(s);
    ++k;
    next.t = static_cast<double>(k) * limits.dt;
    s = next;
  }
  run.trajectory.samples.push_back(s);
  run.history = std::visit([](auto& c) { return c.take_history(); }, controller);
  return run;
}

/// True iff for every alert the car reaches the crossing no earlier than the
/// crossing ends, unless it was already past the crossing when alerted.
inline bool collision_free(const PolicyRun& run) {
  const auto& samples = run.trajectory.samples;
  for (const auto& a : run.alerts) {
    if (position_at(samples, a.receipt_time) >= a.location) continue;
    if (time_to_reach(samples, a.location) < a.crossing_end - detail::kTimeEps) return false;
  }
  return true;
}

}  // namespace midblock
