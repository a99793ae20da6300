#pragma once

// Concrete supply chain from batching plant to paver: truck cycles, a paver
// with a finite hopper consuming at a constant rate, and constraint monitors.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rccsim/constraints.hpp"
#include "rccsim/geometry.hpp"
#include "rccsim/kernel.hpp"

namespace rccsim {

enum class TruckSize : int { kLarge = 0, kSmall = 1 };

inline constexpr std::array<TruckSize, 2> kTruckSizes{TruckSize::kLarge, TruckSize::kSmall};

inline constexpr int index_of(TruckSize size) { return static_cast<int>(size); }

inline std::string_view to_string(TruckSize size) {
  return size == TruckSize::kLarge ? "large" : "small";
}

struct TruckClass {
  double capacity = 7.5;        // m³
  double load_duration = 4.5;   // minutes at the plant
  double dump_duration = 3.75;  // minutes at the paver

  double dump_rate() const { return capacity / dump_duration; }

  friend bool operator==(const TruckClass&, const TruckClass&) = default;
};

inline constexpr TruckClass kLargeTruck{7.5, 4.5, 3.75};
inline constexpr TruckClass kSmallTruck{5.0, 3.0, 2.5};

struct Fleet {
  int large = 0;
  int small = 0;

  int count(TruckSize size) const { return size == TruckSize::kLarge ? large : small; }
  int total() const { return large + small; }

  friend bool operator==(const Fleet&, const Fleet&) = default;
};

enum class TruckState : int {
  kAtPlantQueue = 0,
  kLoading,
  kHauling,
  kAtPaverQueue,
  kDumping,
  kReturning,
  kIdleReleased,
};

inline constexpr int kTruckStateCount = 7;

inline std::string_view to_string(TruckState s) {
  switch (s) {
    case TruckState::kAtPlantQueue: return "at-plant-queue";
    case TruckState::kLoading: return "loading";
    case TruckState::kHauling: return "hauling";
    case TruckState::kAtPaverQueue: return "at-paver-queue";
    case TruckState::kDumping: return "dumping";
    case TruckState::kReturning: return "returning";
    case TruckState::kIdleReleased: return "idle-released";
  }
  return "?";
}

/// Productive states. Queue waiting and release are not busy.
inline constexpr bool is_busy(TruckState s) {
  return s == TruckState::kLoading || s == TruckState::kHauling ||
         s == TruckState::kDumping || s == TruckState::kReturning;
}

enum class PaverPhase : int { kStarved = 0, kPlacing, kComplete };

inline std::string_view to_string(PaverPhase p) {
  switch (p) {
    case PaverPhase::kStarved: return "starved";
    case PaverPhase::kPlacing: return "placing";
    case PaverPhase::kComplete: return "complete";
  }
  return "?";
}

struct PaverSpec {
  double placement_rate = 1.0;   // m³/min
  double hopper_capacity = 15.0;  // m³

  friend bool operator==(const PaverSpec&, const PaverSpec&) = default;
};

/// kPull loads a truck only when the paver's projected stock at that truck's
/// arrival would fall to the target level; kPush loads whenever a truck and
/// the bay are free.
enum class DispatchMode { kPull, kPush };

/// Which idle truck the plant loads next.
enum class DispatchPriority { kSmallFirst, kLargeFirst, kFifo };

struct DispatchPolicy {
  DispatchMode mode = DispatchMode::kPull;
  DispatchPriority priority = DispatchPriority::kSmallFirst;
  double arrival_target_level = 9.5;  // m³ of uncommitted stock at arrival (pull)

  friend bool operator==(const DispatchPolicy&, const DispatchPolicy&) = default;
};

/// Replaces geometry-derived haul times with constants.
struct FixedTravel {
  double haul = 0.0;
  double ret = 0.0;

  friend bool operator==(const FixedTravel&, const FixedTravel&) = default;
};

struct ProcessConfig {
  RoadSpec road;
  SpeedSpec speeds;
  std::array<TruckClass, 2> classes{kLargeTruck, kSmallTruck};
  PaverSpec paver;
  ConstraintSpec constraints;
  DispatchPolicy dispatch;
  std::optional<FixedTravel> fixed_travel;

  const TruckClass& truck_class(TruckSize size) const { return classes[index_of(size)]; }

  friend bool operator==(const ProcessConfig&, const ProcessConfig&) = default;
};

struct RunOptions {
  bool record_trace = false;
  bool check_ledger = true;
};

// Equal-time ordering. Deposits settle before completion and stall detection.
namespace priority {
inline constexpr int kDumpEnd = 0;
inline constexpr int kJobComplete = 1;
inline constexpr int kPaverStall = 2;
inline constexpr int kTruckArrival = 3;
inline constexpr int kLoadEnd = 3;
inline constexpr int kHopperSpace = 4;
inline constexpr int kDispatch = 5;
inline constexpr int kReview = 6;
}  // namespace priority

inline constexpr int kPaverActor = -1;

/// One state transition of a truck or of the paver.
struct ActivityRecord {
  SimTime time = 0.0;
  int actor = kPaverActor;
  int from = 0;  // TruckState or PaverPhase
  int to = 0;
  double volume = 0.0;  // truck: load on board after; paver: placed volume

  bool is_paver() const { return actor == kPaverActor; }

  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

inline std::string transition_name(const ActivityRecord& r) {
  if (r.is_paver()) {
    return std::string(to_string(static_cast<PaverPhase>(r.from))) + "->" +
           std::string(to_string(static_cast<PaverPhase>(r.to)));
  }
  return std::string(to_string(static_cast<TruckState>(r.from))) + "->" +
         std::string(to_string(static_cast<TruckState>(r.to)));
}

struct TruckStats {
  int id = 0;
  TruckSize size = TruckSize::kLarge;
  std::array<double, kTruckStateCount> time_in_state{};
  int loads = 0;

  double busy() const {
    double b = 0.0;
    for (int s = 0; s < kTruckStateCount; ++s) {
      if (is_busy(static_cast<TruckState>(s))) b += time_in_state[s];
    }
    return b;
  }
  double released() const { return time_in_state[index_of_state(TruckState::kIdleReleased)]; }
  double active(SimTime horizon) const { return horizon - released(); }

  static constexpr int index_of_state(TruckState s) { return static_cast<int>(s); }
};

class UndefinedUtilization : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Busy time over active time (horizon minus idle-released time).
inline double utilization(const TruckStats& t, SimTime horizon) {
  if (horizon <= 0.0) throw UndefinedUtilization("utilization over a zero horizon");
  const double active = t.active(horizon);
  return active > 0.0 ? t.busy() / active : 0.0;
}

/// Mean of per-truck utilization within a class; 0 for an empty class.
inline double class_utilization(const std::vector<TruckStats>& trucks, TruckSize size,
                                SimTime horizon) {
  double sum = 0.0;
  int n = 0;
  for (const auto& t : trucks) {
    if (t.size != size) continue;
    sum += utilization(t, horizon);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

struct LedgerSummary {
  double batched = 0.0;
  double placed = 0.0;
  double discarded = 0.0;
  double max_error = 0.0;
  std::uint64_t checks = 0;
};

struct RunResult {
  Fleet fleet;
  SimTime makespan = 0.0;
  std::vector<ActivityRecord> activity;
  std::vector<Violation> violations;
  std::vector<PaverVisit> visits;
  std::vector<TruckStats> trucks;
  std::array<double, 2> class_utilization{};
  LedgerSummary ledger;
  double stall_time = 0.0;  // paver starved between first and last placement
  std::uint64_t events = 0;
  EventTrace trace;

  double utilization_of(TruckSize size) const { return class_utilization[index_of(size)]; }
  std::size_t count(ViolationKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
  }
};

/// One simulation of the supply chain for a fixed starting fleet. Single use:
/// construct, optionally install a review hook, call run().
class RccProcess {
 public:
  using ReviewHook = std::function<void(RccProcess&)>;

  RccProcess(ProcessConfig config, Fleet fleet, RunOptions options = {})
      : config_(std::move(config)),
        fleet_(fleet),
        options_(options),
        kernel_(options.record_trace),
        total_volume_(config_.road.total_volume()) {
    int id = 0;
    for (TruckSize size : kTruckSizes) {
      for (int i = 0; i < fleet.count(size); ++i) {
        Truck t;
        t.id = id++;
        t.size = size;
        trucks_.push_back(t);
        plant_queue_.push_back(t.id);
      }
    }
  }

  void set_review_hook(double interval, ReviewHook hook) {
    review_interval_ = interval;
    review_hook_ = std::move(hook);
  }

  RunResult run() {
    if (options_.check_ledger) kernel_.set_post_event_hook([this] { check_ledger(); });
    if (review_hook_) schedule_review(review_interval_);
    plan_dispatch();
    kernel_.run_until([this] { return complete_; });
    return finish();
  }

  // ---- queries for controllers ----
  const ProcessConfig& config() const { return config_; }
  SimTime now() const { return kernel_.now(); }
  bool complete() const { return complete_; }
  double placed_volume() const { return placed_.at(now()); }

  double current_haul_distance() const {
    return haul_distance(front_position(placed_volume(), config_.road), config_.road);
  }

  double haul_minutes() const {
    if (config_.fixed_travel) return config_.fixed_travel->haul;
    return travel_time(current_haul_distance(), config_.speeds.loaded);
  }
  double return_minutes() const {
    if (config_.fixed_travel) return config_.fixed_travel->ret;
    return travel_time(current_haul_distance(), config_.speeds.empty);
  }

  /// Full cycle of one truck of `size` if it were dispatched now.
  double cycle_time(TruckSize size) const {
    const TruckClass& c = config_.truck_class(size);
    return c.load_duration + haul_minutes() + c.dump_duration + return_minutes();
  }

  /// Trucks of `size` neither released nor marked for release.
  int active_count(TruckSize size) const {
    int n = 0;
    for (const auto& t : trucks_) {
      if (t.size == size && t.state != TruckState::kIdleReleased && !t.release_marked &&
          !t.activation_pending) {
        ++n;
      }
    }
    return n + pending_activations(size);
  }

  int pending_activations(TruckSize size) const {
    int n = 0;
    for (const auto& t : trucks_) n += (t.size == size && t.activation_pending) ? 1 : 0;
    return n;
  }

  int marked_for_release(TruckSize size) const {
    int n = 0;
    for (const auto& t : trucks_) n += (t.size == size && t.release_marked) ? 1 : 0;
    return n;
  }

  int released_count(TruckSize size) const {
    int n = 0;
    for (const auto& t : trucks_) {
      n += (t.size == size && t.state == TruckState::kIdleReleased && !t.activation_pending) ? 1
                                                                                              : 0;
    }
    return n;
  }

  /// Trucks of `size` that have waited at the plant since at or before `since`.
  int idle_at_plant_since(TruckSize size, SimTime since) const {
    int n = 0;
    for (const auto& t : trucks_) {
      if (t.size == size && t.state == TruckState::kAtPlantQueue && !t.release_marked &&
          t.since <= since) {
        ++n;
      }
    }
    return n;
  }

  /// Latest paver stall or steady-supply gap breach, if any.
  std::optional<SimTime> last_supply_breach() const { return last_supply_breach_; }

  // ---- controller actions ----

  /// Idle trucks leave immediately; others finish their cycle first.
  /// Returns the number actually marked or released.
  int release(TruckSize size, int count) {
    int done = 0;
    // Idle at plant first, latest arrivals first.
    std::vector<int> idle;
    for (auto it = plant_queue_.rbegin(); it != plant_queue_.rend(); ++it) {
      if (trucks_[*it].size == size && static_cast<int>(idle.size()) < count) idle.push_back(*it);
    }
    for (int id : idle) {
      plant_queue_.erase(std::find(plant_queue_.begin(), plant_queue_.end(), id));
      set_state(trucks_[id], TruckState::kIdleReleased);
      ++done;
    }
    for (auto it = trucks_.rbegin(); it != trucks_.rend() && done < count; ++it) {
      Truck& t = *it;
      if (t.size != size || t.release_marked || t.activation_pending) continue;
      if (t.state == TruckState::kIdleReleased || t.state == TruckState::kAtPlantQueue) continue;
      t.release_marked = true;
      ++done;
    }
    if (done > 0) plan_dispatch();
    return done;
  }

  /// Unmarks pending releases first, then recalls released trucks after
  /// `delay` minutes. Returns the number restored.
  int reactivate(TruckSize size, int count, double delay) {
    int done = 0;
    for (auto& t : trucks_) {
      if (done >= count) break;
      if (t.size == size && t.release_marked) {
        t.release_marked = false;
        ++done;
      }
    }
    for (auto& t : trucks_) {
      if (done >= count) break;
      if (t.size != size || t.state != TruckState::kIdleReleased || t.activation_pending) continue;
      t.activation_pending = true;
      ++done;
      const int id = t.id;
      kernel_.schedule(now() + delay, priority::kTruckArrival, "activate", [this, id] {
        Truck& tr = trucks_[id];
        tr.activation_pending = false;
        set_state(tr, TruckState::kAtPlantQueue);
        plant_queue_.push_back(id);
        plan_dispatch();
      });
    }
    return done;
  }

 private:
  struct Truck {
    int id = 0;
    TruckSize size = TruckSize::kLarge;
    TruckState state = TruckState::kAtPlantQueue;
    SimTime since = 0.0;
    std::optional<SimTime> batch_complete_time;
    double on_board = 0.0;
    SimTime dump_start = 0.0;
    SimTime eta = 0.0;  // expected paver arrival while loading or hauling
    std::size_t visit = 0;
    bool release_marked = false;
    bool activation_pending = false;
    TruckStats stats;
  };

  const TruckClass& cls(const Truck& t) const { return config_.truck_class(t.size); }

  void log(int actor, int from, int to, double volume) {
    activity_.push_back(ActivityRecord{now(), actor, from, to, volume});
  }

  void set_state(Truck& t, TruckState next) {
    t.stats.time_in_state[static_cast<int>(t.state)] += now() - t.since;
    const TruckState prev = t.state;
    t.state = next;
    t.since = now();
    log(t.id, static_cast<int>(prev), static_cast<int>(next), t.on_board);
  }

  void set_phase(PaverPhase next) {
    if (next == phase_) return;
    if (phase_ == PaverPhase::kStarved && started_) stall_time_ += now() - phase_since_;
    if (phase_ == PaverPhase::kStarved && next == PaverPhase::kPlacing) started_ = true;
    log(kPaverActor, static_cast<int>(phase_), static_cast<int>(next), placed_volume());
    phase_ = next;
    phase_since_ = now();
  }

  // ---- dispatch ----

  /// First idle truck of `size` in plant-queue order.
  std::optional<int> first_idle(TruckSize size) const {
    for (int id : plant_queue_) {
      if (trucks_[id].size == size) return id;
    }
    return std::nullopt;
  }

  /// Classes with an idle truck, most preferred first.
  std::vector<TruckSize> idle_classes_by_priority() const {
    std::vector<TruckSize> order;
    switch (config_.dispatch.priority) {
      case DispatchPriority::kSmallFirst:
        order = {TruckSize::kSmall, TruckSize::kLarge};
        break;
      case DispatchPriority::kLargeFirst:
        order = {TruckSize::kLarge, TruckSize::kSmall};
        break;
      case DispatchPriority::kFifo:
        for (int id : plant_queue_) {
          if (std::find(order.begin(), order.end(), trucks_[id].size) == order.end()) {
            order.push_back(trucks_[id].size);
          }
        }
        break;
    }
    std::erase_if(order, [&](TruckSize size) { return !first_idle(size); });
    return order;
  }

  /// Earliest expected paver arrival among loads already under way.
  std::optional<SimTime> first_eta() const {
    std::optional<SimTime> eta;
    for (const auto& t : trucks_) {
      if (t.state == TruckState::kLoading || t.state == TruckState::kHauling) {
        if (!eta || t.eta < *eta) eta = t.eta;
      }
    }
    return eta;
  }

  /// Time at which loading a truck of `size` makes it reach the paver just as
  /// the uncommitted stock falls to the target level. Infinite while the paver
  /// is starved with loads still on the way.
  SimTime pull_due(TruckSize size) const {
    const TruckClass& c = config_.truck_class(size);
    const double rate = config_.paver.placement_rate;
    const double lead = c.load_duration + haul_minutes();
    const double stock = committed_ - config_.dispatch.arrival_target_level;
    if (!started_) {
      // No consumption before the first dump.
      const auto eta = first_eta();
      if (!eta) return now();
      return *eta - lead + stock / rate;
    }
    const double threshold = stock - rate * lead;
    if (placed_volume() >= threshold - kLevelTolerance) return now() - (placed_volume() - threshold) / rate;
    if (auto when = time_to_cross(placed_, threshold, now())) return *when;
    return std::numeric_limits<double>::infinity();
  }

  void plan_dispatch() {
    kernel_.cancel(dispatch_event_);
    if (complete_ || bay_busy_) return;
    if (committed_ >= total_volume_ - kVolumeTolerance) return;
    const auto classes = idle_classes_by_priority();
    if (classes.empty()) return;
    if (config_.dispatch.mode == DispatchMode::kPush) {
      start_loading(trucks_[*first_idle(classes.front())]);
      return;
    }
    // Most preferred class that can still arrive on time; otherwise the
    // least late one.
    std::optional<TruckSize> on_time;
    SimTime on_time_due = 0.0;
    std::optional<TruckSize> least_late;
    SimTime least_late_due = 0.0;
    for (TruckSize size : classes) {
      const SimTime due = pull_due(size);
      if (due >= now() - kLevelTolerance) {
        if (!on_time) {
          on_time = size;
          on_time_due = due;
        }
      } else if (!least_late || due > least_late_due) {
        least_late = size;
        least_late_due = due;
      }
    }
    if (on_time) {
      if (on_time_due <= now() + kLevelTolerance) {
        start_loading(trucks_[*first_idle(*on_time)]);
      } else if (std::isfinite(on_time_due)) {
        dispatch_event_ = kernel_.schedule(on_time_due, priority::kDispatch, "dispatch-check",
                                           [this] { plan_dispatch(); });
      }
      return;
    }
    start_loading(trucks_[*first_idle(*least_late)]);
  }

  void start_loading(Truck& t) {
    plant_queue_.erase(std::find(plant_queue_.begin(), plant_queue_.end(), t.id));
    bay_busy_ = true;
    committed_ += cls(t).capacity;
    set_state(t, TruckState::kLoading);
    t.eta = now() + cls(t).load_duration + haul_minutes();
    const int id = t.id;
    kernel_.schedule(now() + cls(t).load_duration, priority::kLoadEnd, "load-end",
                     [this, id] { on_load_end(trucks_[id]); });
  }

  void on_load_end(Truck& t) {
    bay_busy_ = false;
    t.on_board = cls(t).capacity;
    t.batch_complete_time = now();
    batched_ += t.on_board;
    ++t.stats.loads;
    set_state(t, TruckState::kHauling);
    t.eta = now() + haul_minutes();
    const int id = t.id;
    kernel_.schedule(t.eta, priority::kTruckArrival, "paver-arrival",
                     [this, id] { on_paver_arrival(trucks_[id]); });
    plan_dispatch();
  }

  // ---- paver side ----

  void on_paver_arrival(Truck& t) {
    set_state(t, TruckState::kAtPaverQueue);
    t.visit = visits_.size();
    visits_.push_back(PaverVisit{now(), now(), t.id});
    if (t.visit > 0) {
      const PaverVisit& prev = visits_[t.visit - 1];
      const bool prev_left = trucks_[prev.truck_id].state != TruckState::kDumping &&
                             trucks_[prev.truck_id].state != TruckState::kAtPaverQueue;
      if (prev_left &&
          now() - prev.departure - config_.constraints.interarrival_limit > kConstraintSlack) {
        last_supply_breach_ = now();
      }
    }
    paver_queue_.push_back(t.id);
    try_start_dump();
  }

  double space_threshold(const Truck& t) const {
    return config_.paver.hopper_capacity - cls(t).capacity;
  }

  /// Starts the head of the paver queue if its load fits right now.
  bool start_dump_if_fits() {
    if (complete_ || dumping_ || paver_queue_.empty()) return false;
    Truck& t = trucks_[paver_queue_.front()];
    if (hopper_.at(now()) > space_threshold(t) + kLevelTolerance) return false;
    paver_queue_.pop_front();
    start_dump(t);
    return true;
  }

  void try_start_dump() {
    kernel_.cancel(space_event_);
    if (complete_ || dumping_ || paver_queue_.empty()) return;
    if (start_dump_if_fits()) return;
    const double space_threshold = this->space_threshold(trucks_[paver_queue_.front()]);
    if (auto when = time_to_cross(hopper_, space_threshold, now())) {
      space_event_ = kernel_.schedule(*when, priority::kHopperSpace, "hopper-space",
                                      [this] { try_start_dump(); });
    }
  }

  void start_dump(Truck& t) {
    dumping_ = t.id;
    t.dump_start = now();
    inflow_ = cls(t).dump_rate();
    set_state(t, TruckState::kDumping);
    const int id = t.id;
    kernel_.schedule(now() + cls(t).dump_duration, priority::kDumpEnd, "dump-end",
                     [this, id] { on_dump_end(trucks_[id]); });
    update_flows();
  }

  void on_dump_end(Truck& t) {
    // Settle rounding so the hopper receives exactly the load.
    const double transferred = inflow_ * (now() - t.dump_start);
    hopper_ = update_rate(hopper_, hopper_.rate, now());
    hopper_.level += t.on_board - transferred;
    inflow_ = 0.0;
    t.on_board = 0.0;
    dumping_.reset();
    if (auto v = check_freshness(*t.batch_complete_time, now(), t.id, config_.constraints)) {
      violations_.push_back(*v);
    }
    t.batch_complete_time.reset();
    visits_[t.visit].departure = now();
    set_state(t, TruckState::kReturning);
    const int id = t.id;
    kernel_.schedule(now() + return_minutes(), priority::kTruckArrival, "plant-arrival",
                     [this, id] { on_plant_arrival(trucks_[id]); });
    // A queued truck that fits takes over at once, so the paver sees no gap.
    if (start_dump_if_fits()) return;
    update_flows();
    try_start_dump();
  }

  void on_plant_arrival(Truck& t) {
    if (t.release_marked) {
      t.release_marked = false;
      set_state(t, TruckState::kIdleReleased);
    } else {
      set_state(t, TruckState::kAtPlantQueue);
      plant_queue_.push_back(t.id);
    }
    plan_dispatch();
  }

  /// Recomputes hopper and placement rates from inflow and hopper content,
  /// then reschedules the level-crossing events.
  void update_flows() {
    const double rate = config_.paver.placement_rate;
    const double level = hopper_.at(now());
    double placing = 0.0;
    if (!complete_) placing = level > kLevelTolerance ? rate : std::min(rate, inflow_);

    const bool placement_changed = placing != placed_.rate;
    if (placement_changed) placed_ = update_rate(placed_, placing, now());
    hopper_ = update_rate(hopper_, inflow_ - placing, now());
    if (level <= kLevelTolerance && hopper_.rate <= 0.0) hopper_.level = 0.0;

    // A job that is already fully placed goes straight to complete at this
    // instant, so it never shows a zero-length starved spell.
    const bool done = !complete_ && placed_.at(now()) >= total_volume_ - kVolumeTolerance;
    if (!complete_ && !done) set_phase(placing > 0.0 ? PaverPhase::kPlacing : PaverPhase::kStarved);

    kernel_.cancel(stall_event_);
    kernel_.cancel(complete_event_);
    if (complete_) return;
    if (hopper_.rate < 0.0) {
      if (auto when = time_to_cross(hopper_, 0.0, now())) {
        stall_event_ = kernel_.schedule(*when, priority::kPaverStall, "hopper-empty",
                                        [this] { on_hopper_empty(); });
      }
    }
    if (done) {
      complete_event_ = kernel_.schedule(now(), priority::kJobComplete, "job-complete",
                                         [this] { on_complete(); });
    } else if (auto when = time_to_cross(placed_, total_volume_, now())) {
      complete_event_ = kernel_.schedule(*when, priority::kJobComplete, "job-complete",
                                         [this] { on_complete(); });
    }
    if (placement_changed && config_.dispatch.mode == DispatchMode::kPull) plan_dispatch();
    if (!dumping_ && !paver_queue_.empty()) try_start_dump();
  }

  void on_hopper_empty() {
    const double level = hopper_.at(now());
    if (level < -kLevelTolerance || level > kLevelTolerance) {
      throw ConservationError("hopper-empty fired with level " + std::to_string(level));
    }
    hopper_ = update_rate(hopper_, hopper_.rate, now());
    hopper_.level = 0.0;
    last_supply_breach_ = now();
    update_flows();
  }

  void on_complete() {
    placed_ = update_rate(placed_, 0.0, now());
    const double residual = placed_.level - total_volume_;
    placed_.level = total_volume_;
    hopper_ = update_rate(hopper_, 0.0, now());
    hopper_.level += residual;
    if (dumping_) {
      Truck& t = trucks_[*dumping_];
      t.on_board -= inflow_ * (now() - t.dump_start);
    }
    complete_ = true;
    inflow_ = 0.0;
    set_phase(PaverPhase::kComplete);
    kernel_.cancel(stall_event_);
    kernel_.cancel(space_event_);
    kernel_.cancel(dispatch_event_);
  }

  // ---- bookkeeping ----

  double volume_on_trucks() const {
    double v = 0.0;
    for (const auto& t : trucks_) {
      if (t.on_board <= 0.0) continue;
      v += t.on_board;
      if (t.state == TruckState::kDumping && !complete_) v -= inflow_ * (now() - t.dump_start);
    }
    return v;
  }

  void check_ledger() {
    if (complete_) return;
    const double error =
        std::abs(batched_ - (volume_on_trucks() + hopper_.at(now()) + placed_volume()));
    ledger_.max_error = std::max(ledger_.max_error, error);
    ++ledger_.checks;
    if (error > kLevelTolerance) {
      throw ConservationError("mass ledger off by " + std::to_string(error) + " at t=" +
                              std::to_string(now()));
    }
  }

  void schedule_review(SimTime at) {
    kernel_.schedule(at, priority::kReview, "review", [this] {
      if (complete_) return;
      review_hook_(*this);
      schedule_review(now() + review_interval_);
    });
  }

  RunResult finish() {
    RunResult r;
    r.fleet = fleet_;
    r.makespan = now();
    const double discarded = volume_on_trucks() + hopper_.at(now());
    ledger_.batched = batched_;
    ledger_.placed = placed_.level;
    ledger_.discarded = discarded;
    const double error = std::abs(batched_ - (placed_.level + discarded));
    ledger_.max_error = std::max(ledger_.max_error, error);
    ++ledger_.checks;
    if (options_.check_ledger && error > kLevelTolerance) {
      throw ConservationError("final mass ledger off by " + std::to_string(error));
    }
    r.ledger = ledger_;

    for (auto& t : trucks_) {
      t.stats.time_in_state[static_cast<int>(t.state)] += now() - t.since;
      t.since = now();
      t.stats.id = t.id;
      t.stats.size = t.size;
      r.trucks.push_back(t.stats);
    }
    for (TruckSize size : kTruckSizes) {
      r.class_utilization[index_of(size)] = class_utilization(r.trucks, size, r.makespan);
    }

    r.violations = std::move(violations_);
    auto gaps = check_interarrival(std::span<const PaverVisit>(visits_), config_.constraints);
    r.violations.insert(r.violations.end(), gaps.begin(), gaps.end());
    std::stable_sort(r.violations.begin(), r.violations.end(),
                     [](const Violation& a, const Violation& b) { return a.time < b.time; });
    r.visits = std::move(visits_);
    r.activity = std::move(activity_);
    r.stall_time = stall_time_;
    r.events = kernel_.fired();
    r.trace = kernel_.trace();
    return r;
  }

  ProcessConfig config_;
  Fleet fleet_;
  RunOptions options_;
  Kernel kernel_;
  double total_volume_ = 0.0;

  std::vector<Truck> trucks_;
  std::deque<int> plant_queue_;
  std::deque<int> paver_queue_;
  bool bay_busy_ = false;
  std::optional<int> dumping_;

  ContinuousLevel hopper_;
  ContinuousLevel placed_;
  double inflow_ = 0.0;
  double committed_ = 0.0;  // volume ever assigned to a load, including loading
  double batched_ = 0.0;
  PaverPhase phase_ = PaverPhase::kStarved;
  SimTime phase_since_ = 0.0;
  bool started_ = false;
  double stall_time_ = 0.0;
  bool complete_ = false;
  std::optional<SimTime> last_supply_breach_;

  EventHandle dispatch_event_;
  EventHandle space_event_;
  EventHandle stall_event_;
  EventHandle complete_event_;

  double review_interval_ = 0.0;
  ReviewHook review_hook_;

  std::vector<ActivityRecord> activity_;
  std::vector<Violation> violations_;
  std::vector<PaverVisit> visits_;
  LedgerSummary ledger_;
};

/// Runs one fixed-fleet simulation.
inline RunResult simulate(const ProcessConfig& config, Fleet fleet, RunOptions options = {}) {
  RccProcess process(config, fleet, options);
  return process.run();
}

}  // namespace rccsim
