#pragma once

// Regulatory monitors: load freshness and steady supply to the paver.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rccsim/kernel.hpp"

namespace rccsim {

struct ConstraintSpec {
  double freshness_limit = 45.0;    // minutes from batch completion to compaction
  double interarrival_limit = 3.0;  // minutes
  double compaction_lag = 0.0;      // minutes after dump end until compaction

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

enum class ViolationKind { kFreshness, kInterarrival };

inline std::string_view to_string(ViolationKind kind) {
  return kind == ViolationKind::kFreshness ? "freshness" : "interarrival";
}

struct Violation {
  ViolationKind kind = ViolationKind::kFreshness;
  SimTime time = 0.0;
  double magnitude = 0.0;  // minutes over the limit, always > 0
  int truck_id = -1;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Overshoots at or below this are rounding noise, not breaches.
inline constexpr double kConstraintSlack = 1e-9;

inline std::optional<Violation> check_freshness(SimTime batch_complete, SimTime dump_end,
                                                int truck_id, const ConstraintSpec& spec) {
  const double age = dump_end + spec.compaction_lag - batch_complete;
  const double over = age - spec.freshness_limit;
  if (over <= kConstraintSlack) return std::nullopt;
  return Violation{ViolationKind::kFreshness, dump_end, over, truck_id};
}

/// One truck's stay at the paver. departure is the dump end.
struct PaverVisit {
  SimTime arrival = 0.0;
  SimTime departure = 0.0;
  int truck_id = -1;
};

/// Gap rule over visits sorted by arrival: the discharge point must not sit
/// without a truck for longer than the limit, i.e. arrival[i] - departure[i-1].
/// Only gaps between the first and last arrival are inspected.
inline std::vector<Violation> check_interarrival(std::span<const PaverVisit> visits,
                                                 const ConstraintSpec& spec) {
  std::vector<Violation> out;
  for (std::size_t i = 1; i < visits.size(); ++i) {
    const double gap = visits[i].arrival - visits[i - 1].departure;
    const double over = gap - spec.interarrival_limit;
    if (over > kConstraintSlack) {
      out.push_back(Violation{ViolationKind::kInterarrival, visits[i].arrival, over,
                              visits[i].truck_id});
    }
  }
  return out;
}

/// Plain arrival-time form: each arrival is treated as an instantaneous visit,
/// so gaps are consecutive arrival differences. truck_id is the list index.
inline std::vector<Violation> check_interarrival(std::span<const SimTime> arrivals,
                                                 const ConstraintSpec& spec) {
  std::vector<PaverVisit> visits;
  visits.reserve(arrivals.size());
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    visits.push_back(PaverVisit{arrivals[i], arrivals[i], static_cast<int>(i)});
  }
  return check_interarrival(std::span<const PaverVisit>(visits), spec);
}

}  // namespace rccsim
