#pragma once

// Runs RccProcess and the brute-force oracle on the same push-dispatch
// instance and reports the first disagreement.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "oracle_sim.hpp"
#include "rccsim/process.hpp"

namespace oracle {

inline Params params_for(const rccsim::ProcessConfig& c, rccsim::Fleet fleet) {
  using namespace rccsim;
  Params p;
  for (TruckSize size : kTruckSizes) {
    for (int i = 0; i < fleet.count(size); ++i) {
      const auto& k = c.truck_class(size);
      p.trucks.push_back({k.capacity, k.load_duration, k.dump_duration});
      p.is_small.push_back(size == TruckSize::kSmall ? 1 : 0);
    }
  }
  p.small_first_order = c.dispatch.priority == DispatchPriority::kSmallFirst;
  p.haul = c.fixed_travel->haul;
  p.ret = c.fixed_travel->ret;
  p.rate = c.paver.placement_rate;
  p.hopper_cap = c.paver.hopper_capacity;
  p.total = c.road.total_volume();
  return p;
}

struct Comparison {
  std::size_t steps = 0;
  std::string mismatch;  // empty when the traces agree

  bool ok() const { return mismatch.empty(); }
};

inline Comparison compare(const rccsim::ProcessConfig& c, rccsim::Fleet fleet, double tol = 1e-9) {
  const auto r = rccsim::simulate(c, fleet);
  const auto o = run(params_for(c, fleet));
  std::vector<Step> mine;
  for (const auto& rec : r.activity) mine.push_back({rec.time, rec.actor, rccsim::transition_name(rec)});
  const auto a = canonical(mine, tol);
  const auto b = canonical(o.steps, tol);
  Comparison cmp;
  cmp.steps = a.size();
  std::ostringstream msg;
  if (a.size() != b.size()) {
    msg << "trace length " << a.size() << " vs oracle " << b.size();
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i].time - b[i].time) > tol || a[i].actor != b[i].actor ||
          a[i].transition != b[i].transition) {
        msg << "step " << i << ": " << a[i].time << " " << a[i].actor << " " << a[i].transition
            << " vs oracle " << b[i].time << " " << b[i].actor << " " << b[i].transition;
        break;
      }
    }
  }
  if (msg.str().empty() && std::abs(r.makespan - o.makespan) > tol) {
    msg << "makespan " << r.makespan << " vs oracle " << o.makespan;
  }
  if (msg.str().empty()) {
    for (std::size_t i = 0; i < r.trucks.size(); ++i) {
      if (std::abs(r.trucks[i].busy() - o.busy[i]) > tol) {
        msg << "busy time of truck " << i << " " << r.trucks[i].busy() << " vs oracle " << o.busy[i];
        break;
      }
    }
  }
  cmp.mismatch = msg.str();
  return cmp;
}

}  // namespace oracle
