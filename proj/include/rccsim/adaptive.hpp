#pragma once

// Feedback control of the active fleet during a run. Reviews fire on the
// kernel clock and act only through RccProcess::release/reactivate.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rccsim/process.hpp"

namespace rccsim {

class PolicyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ControlPolicy {
  double review_interval = 60.0;
  // Whole trucks; infinity disables every adjustment.
  double hysteresis_band = 1.0;
  std::array<int, 2> min_active{1, 1};
  // Upper bound per class; unset means the seeded fleet.
  std::array<std::optional<int>, 2> max_active{};
  double mobilization_delay = 0.0;
  bool small_fleet_controlled = false;

  bool controls(TruckSize size) const {
    return size == TruckSize::kLarge || small_fleet_controlled;
  }
  bool neutralized() const { return std::isinf(hysteresis_band); }

  friend bool operator==(const ControlPolicy&, const ControlPolicy&) = default;
};

inline void validate(const ControlPolicy& p) {
  if (!(p.review_interval > 0.0) || !std::isfinite(p.review_interval)) {
    throw PolicyError("review_interval must be positive");
  }
  if (!(p.hysteresis_band >= 0.0) ||
      (std::isfinite(p.hysteresis_band) && p.hysteresis_band != std::floor(p.hysteresis_band))) {
    throw PolicyError("hysteresis_band must be a whole number of trucks or inf");
  }
  if (!(p.mobilization_delay >= 0.0) || !std::isfinite(p.mobilization_delay)) {
    throw PolicyError("mobilization_delay must be non-negative");
  }
  for (TruckSize size : kTruckSizes) {
    const int i = index_of(size);
    if (p.min_active[i] < 0) throw PolicyError("min_active must be non-negative");
    if (p.max_active[i] && *p.max_active[i] < p.min_active[i]) {
      throw PolicyError("min_active exceeds max_active");
    }
  }
}

/// Trucks needed so that one arrives every dump interval over a full cycle.
inline int required_fleet(double cycle_time, double dump_interval) {
  if (!(cycle_time > 0.0) || !(dump_interval > 0.0)) {
    throw PolicyError("cycle time and dump interval must be positive");
  }
  return static_cast<int>(std::ceil(cycle_time / dump_interval - 1e-12));
}

struct StockFlowState {
  int stock = 0;    // active trucks
  int inflow = 0;   // activations waiting for mobilization
  int outflow = 0;  // marked, finishing their cycle
};

struct ReviewRecord {
  SimTime time = 0.0;
  TruckSize size = TruckSize::kLarge;
  double haul_distance = 0.0;
  double cycle_time = 0.0;
  int required = 0;
  int target = 0;
  StockFlowState before;
  int released = 0;
  int reactivated = 0;
};

/// Applies the four loops to one class:
///  1/2. haul distance sets the cycle and so the required fleet;
///  3.   a recent supply breach lifts the floor by one for a review period;
///  4.   trucks idle at the plant for a whole period go, down to the target.
class FleetController {
 public:
  FleetController(ControlPolicy policy, Fleet seeded) : policy_(policy) {
    validate(policy_);
    for (TruckSize size : kTruckSizes) {
      const int i = index_of(size);
      max_[i] = std::min(policy_.max_active[i].value_or(seeded.count(size)), seeded.count(size));
      min_[i] = std::min(policy_.min_active[i], max_[i]);
    }
  }

  void install(RccProcess& process) {
    process.set_review_hook(policy_.review_interval, [this](RccProcess& p) { review(p); });
  }

  void review(RccProcess& p) {
    if (policy_.neutralized()) return;
    const SimTime now = p.now();
    const auto breach = p.last_supply_breach();
    const bool starved = breach && *breach > now - policy_.review_interval;
    for (TruckSize size : kTruckSizes) {
      if (!policy_.controls(size)) continue;
      const int i = index_of(size);
      const TruckClass& k = p.config().truck_class(size);
      ReviewRecord rec;
      rec.time = now;
      rec.size = size;
      rec.haul_distance = p.config().fixed_travel ? 0.0 : p.current_haul_distance();
      rec.cycle_time = p.cycle_time(size);
      rec.required = required_fleet(rec.cycle_time, k.capacity / p.config().paver.placement_rate);
      rec.before = {p.active_count(size), p.pending_activations(size), p.marked_for_release(size)};
      const int active = rec.before.stock;
      int target = std::clamp(rec.required, min_[i], max_[i]);
      if (starved) target = std::min(std::max(target, active + 1), max_[i]);
      rec.target = target;

      const int band = static_cast<int>(policy_.hysteresis_band);
      if (target > active + band || (starved && target > active)) {
        rec.reactivated = p.reactivate(size, target - active, policy_.mobilization_delay);
      } else if (target < active - band) {
        rec.released = p.release(size, active - target);
      } else if (target < active && !starved) {
        const int idle = p.idle_at_plant_since(size, now - policy_.review_interval);
        const int excess = std::min(idle, active - target);
        if (excess > 0) rec.released = p.release(size, excess);
      }
      reviews_.push_back(rec);
    }
  }

  const std::vector<ReviewRecord>& reviews() const { return reviews_; }

 private:
  ControlPolicy policy_;
  std::array<int, 2> min_{};
  std::array<int, 2> max_{};
  std::vector<ReviewRecord> reviews_;
};

struct FleetStep {
  SimTime time = 0.0;
  std::array<int, 2> active{};  // indexed by TruckSize
};

/// Active trucks per class as a step function of time, from the activity log.
inline std::vector<FleetStep> fleet_schedule(const RunResult& run) {
  std::vector<FleetStep> out;
  FleetStep cur{0.0, {run.fleet.large, run.fleet.small}};
  out.push_back(cur);
  std::vector<TruckSize> size_of;
  for (const auto& t : run.trucks) size_of.push_back(t.size);
  const int released = static_cast<int>(TruckState::kIdleReleased);
  for (const auto& rec : run.activity) {
    if (rec.is_paver()) continue;
    int delta = 0;
    if (rec.to == released && rec.from != released) delta = -1;
    if (rec.from == released && rec.to != released) delta = +1;
    if (delta == 0) continue;
    cur.active[index_of(size_of[static_cast<std::size_t>(rec.actor)])] += delta;
    cur.time = rec.time;
    if (out.back().time == cur.time) {
      out.back() = cur;
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

/// Truck-hours per class as the integral of the schedule up to `horizon`.
inline std::array<double, 2> schedule_truck_hours(const std::vector<FleetStep>& schedule,
                                                  SimTime horizon) {
  std::array<double, 2> hours{};
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const SimTime end = i + 1 < schedule.size() ? schedule[i + 1].time : horizon;
    const double span = std::max(0.0, std::min(end, horizon) - schedule[i].time);
    for (int c = 0; c < 2; ++c) hours[c] += schedule[i].active[c] * span / 60.0;
  }
  return hours;
}

struct AdaptiveResult {
  RunResult run;
  std::vector<ReviewRecord> reviews;
  std::vector<FleetStep> schedule;
};

inline AdaptiveResult simulate_adaptive(const ProcessConfig& config, Fleet fleet,
                                        const ControlPolicy& policy, RunOptions options = {}) {
  FleetController controller(policy, fleet);
  RccProcess process(config, fleet, options);
  controller.install(process);
  AdaptiveResult out;
  out.run = process.run();
  out.reviews = controller.reviews();
  out.schedule = fleet_schedule(out.run);
  return out;
}

}  // namespace rccsim
