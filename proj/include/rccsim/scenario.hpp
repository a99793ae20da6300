#pragma once

// Fleet-composition sweep: enumerate, evaluate in isolated runs, filter by
// constraints and rank by utilization.

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rccsim/process.hpp"

namespace rccsim {

struct ScenarioGrid {
  int large_min = 1;
  int large_max = 10;
  int small_min = 1;
  int small_max = 5;

  int large_span() const { return large_max - large_min + 1; }
  int small_span() const { return small_max - small_min + 1; }

  friend bool operator==(const ScenarioGrid&, const ScenarioGrid&) = default;
};

struct Scenario {
  int id = 0;
  int n_large = 0;
  int n_small = 0;

  Fleet fleet() const { return Fleet{n_large, n_small}; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoFeasibleScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario number for a fleet: small-major, so with large in [1,10] the
/// (9 large, 4 small) fleet is #39.
inline int scenario_id(const ScenarioGrid& grid, int n_large, int n_small) {
  return (n_small - grid.small_min) * grid.large_span() + (n_large - grid.large_min) + 1;
}

inline std::vector<Scenario> enumerate(const ScenarioGrid& grid) {
  if (grid.large_min < 0 || grid.small_min < 0 || grid.large_span() <= 0 ||
      grid.small_span() <= 0) {
    throw GridError("scenario grid is empty or negative");
  }
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(grid.large_span() * grid.small_span()));
  for (int s = grid.small_min; s <= grid.small_max; ++s) {
    for (int l = grid.large_min; l <= grid.large_max; ++l) {
      out.push_back(Scenario{scenario_id(grid, l, s), l, s});
    }
  }
  return out;
}

struct CostRates {
  std::array<double, 2> truck_hourly{0.0, 0.0};  // indexed by TruckSize
  double plant_hourly = 0.0;
  double paver_hourly = 0.0;
  double mobilization = 0.0;  // per truck mobilized, including recalls

  friend bool operator==(const CostRates&, const CostRates&) = default;
};

inline double cost(std::array<double, 2> truck_hours, double makespan_hours, int mobilizations,
                   const CostRates& rates) {
  double total = 0.0;
  for (TruckSize size : kTruckSizes) {
    total += truck_hours[index_of(size)] * rates.truck_hourly[index_of(size)];
  }
  total += makespan_hours * (rates.plant_hourly + rates.paver_hourly);
  total += mobilizations * rates.mobilization;
  return total;
}

/// Active truck-hours per class of a finished run.
inline std::array<double, 2> truck_hours(const RunResult& run) {
  std::array<double, 2> hours{};
  for (const auto& t : run.trucks) hours[index_of(t.size)] += t.active(run.makespan) / 60.0;
  return hours;
}

inline int mobilizations(const RunResult& run) {
  int n = run.fleet.total();
  for (const auto& rec : run.activity) {
    if (!rec.is_paver() && rec.from == static_cast<int>(TruckState::kIdleReleased)) ++n;
  }
  return n;
}

inline double cost(const RunResult& run, const CostRates& rates) {
  return cost(truck_hours(run), run.makespan / 60.0, mobilizations(run), rates);
}

struct ScenarioResult {
  Scenario scenario;
  double makespan = 0.0;
  std::array<double, 2> mean_utilization{};
  std::vector<Violation> violations;
  bool accepted = false;
  double cost = 0.0;
  double ledger_error = 0.0;  // worst mass-ledger residual seen during the run
  std::string diagnostic;     // set when the run could not finish

  std::size_t count(ViolationKind kind) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [kind](const Violation& v) { return v.kind == kind; }));
  }
};

inline ScenarioResult to_scenario_result(const Scenario& scenario, const RunResult& run,
                                         const CostRates& rates) {
  ScenarioResult r;
  r.scenario = scenario;
  r.makespan = run.makespan;
  r.mean_utilization = run.class_utilization;
  r.violations = run.violations;
  r.accepted = r.violations.empty();
  r.cost = cost(run, rates);
  r.ledger_error = run.ledger.max_error;
  return r;
}

inline ScenarioResult evaluate(const Scenario& scenario, const ProcessConfig& config,
                               const CostRates& rates = {}) {
  try {
    const RunResult run = simulate(config, scenario.fleet());
    return to_scenario_result(scenario, run, rates);
  } catch (const StarvedModel& e) {
    ScenarioResult r;
    r.scenario = scenario;
    r.diagnostic = std::string("starved model: ") + e.what();
    return r;
  }
}

enum class Objective { kMeanOfClasses, kCapacityWeighted };

inline double objective(const ScenarioResult& r, Objective kind, const ProcessConfig& config) {
  const double ul = r.mean_utilization[index_of(TruckSize::kLarge)];
  const double us = r.mean_utilization[index_of(TruckSize::kSmall)];
  if (kind == Objective::kMeanOfClasses) return (ul + us) / 2.0;
  const double wl = config.truck_class(TruckSize::kLarge).capacity * r.scenario.n_large;
  const double ws = config.truck_class(TruckSize::kSmall).capacity * r.scenario.n_small;
  return wl + ws > 0.0 ? (ul * wl + us * ws) / (wl + ws) : 0.0;
}

/// Accepted results ordered best first: objective descending, then fewer
/// trucks, lower cost, lower id.
inline std::vector<ScenarioResult> rank(std::span<const ScenarioResult> results,
                                        Objective kind = Objective::kMeanOfClasses,
                                        const ProcessConfig& config = {}) {
  std::vector<ScenarioResult> accepted;
  for (const auto& r : results) {
    if (r.accepted) accepted.push_back(r);
  }
  if (accepted.empty()) {
    std::ostringstream msg;
    msg << "no feasible scenario";
    const ScenarioResult* closest = nullptr;
    auto badness = [](const ScenarioResult& r) {
      if (!r.diagnostic.empty()) return std::numeric_limits<double>::infinity();
      double m = 0.0;
      for (const auto& v : r.violations) m += v.magnitude;
      return m;
    };
    for (const auto& r : results) {
      if (!closest || badness(r) < badness(*closest)) closest = &r;
    }
    if (closest) {
      msg << "; closest is #" << closest->scenario.id << " (" << closest->scenario.n_large
          << " large, " << closest->scenario.n_small << " small) with "
          << closest->count(ViolationKind::kFreshness) << " freshness and "
          << closest->count(ViolationKind::kInterarrival) << " interarrival violations";
      if (!closest->diagnostic.empty()) msg << " (" << closest->diagnostic << ")";
    }
    throw NoFeasibleScenario(msg.str());
  }
  std::stable_sort(accepted.begin(), accepted.end(),
                   [&](const ScenarioResult& a, const ScenarioResult& b) {
                     const double oa = objective(a, kind, config);
                     const double ob = objective(b, kind, config);
                     if (oa != ob) return oa > ob;
                     const int ta = a.scenario.n_large + a.scenario.n_small;
                     const int tb = b.scenario.n_large + b.scenario.n_small;
                     if (ta != tb) return ta < tb;
                     if (a.cost != b.cost) return a.cost < b.cost;
                     return a.scenario.id < b.scenario.id;
                   });
  return accepted;
}

/// Evaluates every scenario of the grid on `jobs` worker threads. Results are
/// returned in enumeration order regardless of scheduling.
inline std::vector<ScenarioResult> sweep(const ScenarioGrid& grid, const ProcessConfig& config,
                                         const CostRates& rates = {}, unsigned jobs = 1) {
  const auto scenarios = enumerate(grid);
  std::vector<ScenarioResult> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(scenarios.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        results[i] = evaluate(scenarios[i], config, rates);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenarios.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  // Rethrow the failure of the earliest scenario so the outcome does not
  // depend on scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace rccsim
