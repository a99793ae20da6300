#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "rccsim/adaptive.hpp"
#include "rccsim/scenario.hpp"

using namespace rccsim;

TEST_CASE("enumerate numbers scenarios small-major", "[scenario]") {
  const auto all = enumerate(ScenarioGrid{});
  REQUIRE(all.size() == 50);
  CHECK(all.front() == Scenario{1, 1, 1});
  CHECK(all[38] == Scenario{39, 9, 4});
  CHECK(all.back() == Scenario{50, 10, 5});
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == static_cast<int>(i) + 1);
  CHECK(enumerate(ScenarioGrid{3, 3, 2, 2}).size() == 1);
  CHECK_THROWS_AS(enumerate(ScenarioGrid{3, 2, 1, 1}), GridError);
}

TEST_CASE("cost", "[scenario]") {
  CostRates rates;
  rates.truck_hourly = {100.0, 0.0};
  CHECK(cost({10.0, 0.0}, 10.0, 0, rates) == 1000.0);
  rates.mobilization = 50.0;
  rates.plant_hourly = 10.0;
  CHECK(cost({10.0, 0.0}, 10.0, 2, rates) == 1000.0 + 100.0 + 100.0);
}

TEST_CASE("adaptive schedule costs less than the fixed fleet", "[scenario][adaptive]") {
  ProcessConfig c;
  c.road = RoadSpec{3000.0, 1.0, 1.0, 0.0};
  c.fixed_travel = FixedTravel{10.0, 8.0};
  CostRates rates;
  rates.truck_hourly = {80.0, 60.0};
  ControlPolicy p;
  p.hysteresis_band = 0.0;
  const auto fixed = simulate(c, Fleet{9, 0});
  const auto adaptive = simulate_adaptive(c, Fleet{9, 0}, p);
  CHECK(cost(adaptive.run, rates) < cost(fixed, rates));
}

namespace {

ScenarioResult accepted(int id, int l, int s, double ul, double us, double cost = 0.0) {
  ScenarioResult r;
  r.scenario = {id, l, s};
  r.mean_utilization = {ul, us};
  r.accepted = true;
  r.cost = cost;
  return r;
}

}  // namespace

TEST_CASE("rank orders by objective then fewer trucks, cost and id", "[scenario]") {
  std::vector<ScenarioResult> rs{
      accepted(5, 5, 1, 0.5, 0.5, 10.0), accepted(2, 2, 1, 0.5, 0.5, 20.0),
      accepted(3, 3, 1, 0.6, 0.6), accepted(4, 2, 1, 0.5, 0.5, 10.0)};
  ScenarioResult rejected = accepted(1, 1, 1, 0.9, 0.9);
  rejected.accepted = false;
  rs.push_back(rejected);
  const auto ranked = rank(rs);
  REQUIRE(ranked.size() == 4);
  CHECK(ranked[0].scenario.id == 3);
  CHECK(ranked[1].scenario.id == 4);  // 3 trucks, cheaper
  CHECK(ranked[2].scenario.id == 2);  // 3 trucks, dearer
  CHECK(ranked[3].scenario.id == 5);  // 6 trucks
}

TEST_CASE("capacity-weighted objective", "[scenario]") {
  const auto r = accepted(1, 2, 3, 0.9, 0.3);
  // weights 15 and 15
  CHECK(objective(r, Objective::kCapacityWeighted, ProcessConfig{}) == Catch::Approx(0.6));
  CHECK(objective(r, Objective::kMeanOfClasses, ProcessConfig{}) == Catch::Approx(0.6));
  const auto q = accepted(1, 4, 1, 1.0, 0.0);
  CHECK(objective(q, Objective::kCapacityWeighted, ProcessConfig{}) == Catch::Approx(30.0 / 35.0));
}

TEST_CASE("no feasible scenario names the closest one", "[scenario]") {
  ScenarioResult a = accepted(1, 1, 1, 0.5, 0.5);
  a.accepted = false;
  a.violations = {{ViolationKind::kFreshness, 10.0, 4.0, 0}};
  ScenarioResult b = accepted(2, 2, 1, 0.5, 0.5);
  b.accepted = false;
  b.violations = {{ViolationKind::kInterarrival, 10.0, 1.0, 0}};
  const std::vector<ScenarioResult> rs{a, b};
  try {
    rank(rs);
    FAIL("expected NoFeasibleScenario");
  } catch (const NoFeasibleScenario& e) {
    CHECK(std::string(e.what()).find("#2") != std::string::npos);
  }
}

TEST_CASE("starved scenarios carry a diagnostic instead of aborting the sweep", "[scenario]") {
  ProcessConfig c;
  c.road = RoadSpec{100.0, 1.0, 1.0, 0.0};
  const auto results = sweep(ScenarioGrid{0, 1, 0, 0}, c);
  REQUIRE(results.size() == 2);
  CHECK_FALSE(results[0].accepted);
  CHECK(results[0].diagnostic.find("starved") != std::string::npos);
  CHECK(results[1].diagnostic.empty());
}

TEST_CASE("sweep results do not depend on the worker count", "[scenario]") {
  ProcessConfig c;
  c.road = RoadSpec{2000.0, 11.0, 0.2, 500.0};
  const ScenarioGrid grid{1, 4, 1, 3};
  const auto serial = sweep(grid, c, {}, 1);
  const auto parallel = sweep(grid, c, {}, 5);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].scenario == parallel[i].scenario);
    CHECK(serial[i].makespan == parallel[i].makespan);
    CHECK(serial[i].mean_utilization == parallel[i].mean_utilization);
    CHECK(serial[i].violations == parallel[i].violations);
  }
}
