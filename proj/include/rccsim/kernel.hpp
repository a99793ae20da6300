#pragma once

// Deterministic event-calendar kernel with piecewise-linear continuous levels.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace rccsim {

/// Simulation time in minutes since project start.
using SimTime = double;

inline constexpr double kLevelTolerance = 1e-9;

/// Raised when an event is scheduled before the current clock.
class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when the calendar drains before the completion predicate holds.
class StarvedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a continuous level would go negative beyond tolerance.
class ConservationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Total order key of a calendar entry: (time, priority, seq).
struct EventKey {
  SimTime time = 0.0;
  int priority = 0;
  std::uint64_t seq = 0;

  friend auto operator<=>(const EventKey&, const EventKey&) = default;
};

/// Opaque handle returned by Kernel::schedule; used to cancel.
class EventHandle {
 public:
  EventHandle() = default;
  bool valid() const { return valid_; }
  const EventKey& key() const { return key_; }

 private:
  friend class Kernel;
  explicit EventHandle(EventKey key) : key_(key), valid_(true) {}
  EventKey key_{};
  bool valid_ = false;
};

struct TraceEntry {
  SimTime time = 0.0;
  int priority = 0;
  std::uint64_t seq = 0;
  std::string label;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

using EventTrace = std::vector<TraceEntry>;

class Kernel {
 public:
  using Action = std::function<void()>;

  explicit Kernel(bool record_trace = true) : record_trace_(record_trace) {}

  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  SimTime now() const { return now_; }
  bool empty() const { return calendar_.empty(); }
  std::size_t pending() const { return calendar_.size(); }
  std::uint64_t fired() const { return fired_; }
  const EventTrace& trace() const { return trace_; }

  EventHandle schedule(SimTime time, int priority, std::string label, Action action) {
    if (!std::isfinite(time)) {
      throw SchedulingError("event '" + label + "' scheduled at non-finite time");
    }
    if (time < now_) {
      throw SchedulingError("event '" + label + "' scheduled in the past (" +
                            std::to_string(time) + " < " + std::to_string(now_) + ")");
    }
    EventKey key{time, priority, next_seq_++};
    calendar_.emplace(key, Entry{std::move(label), std::move(action)});
    return EventHandle(key);
  }

  /// Returns true when the event was still pending. Invalidates the handle.
  bool cancel(EventHandle& handle) {
    if (!handle.valid_) return false;
    handle.valid_ = false;
    return calendar_.erase(handle.key_) > 0;
  }

  bool is_pending(const EventHandle& handle) const {
    return handle.valid_ && calendar_.contains(handle.key_);
  }

  /// Called after every fired event (used for ledger checks).
  void set_post_event_hook(std::function<void()> hook) { post_event_ = std::move(hook); }

  /// Fires events with time <= stop, then advances the clock to stop.
  const EventTrace& run_until(SimTime stop) {
    while (!calendar_.empty() && calendar_.begin()->first.time <= stop) {
      fire_next();
    }
    if (stop > now_ && std::isfinite(stop)) now_ = stop;
    return trace_;
  }

  /// Fires events until `done()` holds. Throws StarvedModel if the calendar
  /// runs dry first.
  const EventTrace& run_until(const std::function<bool()>& done) {
    while (!done()) {
      if (calendar_.empty()) {
        throw StarvedModel("calendar exhausted at t=" + std::to_string(now_) +
                           " before completion");
      }
      fire_next();
    }
    return trace_;
  }

 private:
  struct Entry {
    std::string label;
    Action action;
  };

  void fire_next() {
    auto node = calendar_.extract(calendar_.begin());
    const EventKey& key = node.key();
    now_ = key.time;
    ++fired_;
    if (record_trace_) {
      trace_.push_back(TraceEntry{key.time, key.priority, key.seq, node.mapped().label});
    }
    if (node.mapped().action) node.mapped().action();
    if (post_event_) post_event_();
  }

  std::map<EventKey, Entry> calendar_;
  EventTrace trace_;
  std::function<void()> post_event_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
  bool record_trace_ = true;
};

/// A quantity that changes at a constant rate between events.
struct ContinuousLevel {
  double level = 0.0;
  double rate = 0.0;
  SimTime last_update = 0.0;

  double at(SimTime t) const { return level + rate * (t - last_update); }

  friend bool operator==(const ContinuousLevel&, const ContinuousLevel&) = default;
};

/// Earliest t >= now with lv.at(t) == threshold, or nullopt if the level
/// never reaches it under the current rate.
inline std::optional<SimTime> time_to_cross(const ContinuousLevel& lv, double threshold,
                                            SimTime now) {
  const double current = lv.at(now);
  if (current == threshold) return now;
  if (lv.rate == 0.0) return std::nullopt;
  const double dt = (threshold - current) / lv.rate;
  if (dt < 0.0) return std::nullopt;
  return now + dt;
}

/// Advances the level to `at` under the old rate and installs `new_rate`.
/// Negative slack within kLevelTolerance snaps to zero.
inline ContinuousLevel update_rate(const ContinuousLevel& lv, double new_rate, SimTime at) {
  if (at < lv.last_update) {
    throw SchedulingError("update_rate before last update");
  }
  double level = lv.at(at);
  if (level < -kLevelTolerance) {
    throw ConservationError("continuous level went negative: " + std::to_string(level));
  }
  if (level < 0.0) level = 0.0;
  return ContinuousLevel{level, new_rate, at};
}

}  // namespace rccsim
