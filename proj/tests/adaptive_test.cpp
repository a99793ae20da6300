#include <catch2/catch_amalgamated.hpp>

#include <limits>

#include "rccsim/adaptive.hpp"
#include "rccsim/scenario.hpp"

using namespace rccsim;

namespace {

// Cycle of a large truck: 4.5 + 10 + 3.75 + 8 = 26.25 min.
ProcessConfig fixed_travel_job(double volume) {
  ProcessConfig c;
  c.road = RoadSpec{volume, 1.0, 1.0, 0.0};
  c.fixed_travel = FixedTravel{10.0, 8.0};
  return c;
}

}  // namespace

TEST_CASE("required_fleet", "[adaptive]") {
  CHECK(required_fleet(30.0, 7.5) == 4);
  CHECK(required_fleet(128.25, 7.5) == 18);
  CHECK(required_fleet(8.25, 7.5) == 2);
  CHECK(required_fleet(7.5, 7.5) == 1);
  CHECK_THROWS_AS(required_fleet(0.0, 7.5), PolicyError);
  CHECK_THROWS_AS(required_fleet(10.0, 0.0), PolicyError);
}

TEST_CASE("policy validation", "[adaptive]") {
  ControlPolicy p;
  CHECK_NOTHROW(validate(p));
  p.review_interval = 0.0;
  CHECK_THROWS_AS(validate(p), PolicyError);
  p = {};
  p.hysteresis_band = 0.5;
  CHECK_THROWS_AS(validate(p), PolicyError);
  p.hysteresis_band = std::numeric_limits<double>::infinity();
  CHECK_NOTHROW(validate(p));
  p = {};
  p.min_active[0] = 5;
  p.max_active[0] = 4;
  CHECK_THROWS_AS(validate(p), PolicyError);
}

TEST_CASE("review releases down to the required fleet", "[adaptive]") {
  ControlPolicy p;
  p.hysteresis_band = 0.0;
  const auto a = simulate_adaptive(fixed_travel_job(3000.0), Fleet{9, 0}, p);
  REQUIRE_FALSE(a.reviews.empty());
  const auto& first = a.reviews.front();
  CHECK(first.time == 60.0);
  CHECK(first.before.stock == 9);
  CHECK(first.required == 4);
  CHECK(first.target == 4);
  CHECK(first.released == 5);
  CHECK(a.schedule.back().active[index_of(TruckSize::kLarge)] == 4);
  CHECK(a.run.violations.empty());
}

TEST_CASE("review inside the band leaves the fleet alone", "[adaptive]") {
  ControlPolicy p;
  p.hysteresis_band = 1.0;
  p.min_active[0] = 4;
  const auto a = simulate_adaptive(fixed_travel_job(3000.0), Fleet{5, 0}, p);
  REQUIRE_FALSE(a.reviews.empty());
  for (const auto& r : a.reviews) {
    CHECK(r.target == 4);
    CHECK(r.reactivated == 0);
  }
  // Only idle excess may go, never below the target.
  for (const auto& s : a.schedule) CHECK(s.active[0] >= 4);
}

TEST_CASE("marked trucks finish their cycle before leaving", "[adaptive]") {
  ControlPolicy p;
  p.hysteresis_band = 0.0;
  const auto a = simulate_adaptive(fixed_travel_job(3000.0), Fleet{9, 0}, p);
  const int released = static_cast<int>(TruckState::kIdleReleased);
  for (const auto& rec : a.run.activity) {
    if (rec.is_paver() || rec.to != released) continue;
    CHECK(rec.from == static_cast<int>(TruckState::kAtPlantQueue));
  }
  CHECK(a.run.ledger.max_error <= 1e-9);
}

TEST_CASE("fleet_schedule from the activity log", "[adaptive]") {
  SECTION("no adjustments gives a constant schedule") {
    const auto run = simulate(fixed_travel_job(200.0), Fleet{3, 1});
    const auto s = fleet_schedule(run);
    REQUIRE(s.size() == 1);
    CHECK(s[0].active[0] == 3);
    CHECK(s[0].active[1] == 1);
    const auto h = schedule_truck_hours(s, run.makespan);
    CHECK(h[0] == Catch::Approx(3 * run.makespan / 60.0));
  }
  SECTION("schedule hours match per-truck active hours") {
    ControlPolicy p;
    p.hysteresis_band = 0.0;
    const auto a = simulate_adaptive(fixed_travel_job(3000.0), Fleet{9, 0}, p);
    const auto from_schedule = schedule_truck_hours(a.schedule, a.run.makespan);
    const auto from_trucks = truck_hours(a.run);
    CHECK(from_schedule[0] == Catch::Approx(from_trucks[0]).epsilon(1e-12));
  }
}

TEST_CASE("an infinite band reproduces the fixed run", "[adaptive]") {
  ControlPolicy p;
  p.hysteresis_band = std::numeric_limits<double>::infinity();
  const ProcessConfig c = fixed_travel_job(3000.0);
  const auto fixed = simulate(c, Fleet{6, 2});
  const auto a = simulate_adaptive(c, Fleet{6, 2}, p);
  CHECK(a.run.makespan == fixed.makespan);
  REQUIRE(a.run.activity.size() == fixed.activity.size());
  for (std::size_t i = 0; i < fixed.activity.size(); ++i) {
    CHECK(a.run.activity[i].time == fixed.activity[i].time);
    CHECK(a.run.activity[i].actor == fixed.activity[i].actor);
    CHECK(a.run.activity[i].to == fixed.activity[i].to);
  }
  CHECK(a.run.class_utilization == fixed.class_utilization);
}

TEST_CASE("case-study schedule dips near the plant and rises after", "[adaptive][case]") {
  const ProcessConfig c;
  const auto a = simulate_adaptive(c, Fleet{10, 2}, ControlPolicy{});
  CHECK(a.run.violations.empty());
  int low = 99;
  SimTime low_at = 0.0;
  for (const auto& s : a.schedule) {
    if (s.active[0] < low) {
      low = s.active[0];
      low_at = s.time;
    }
  }
  CHECK(low < 10);
  CHECK(a.schedule.back().active[0] > low);
  // Front crosses the plant at 25,000 m, i.e. after 55,000 m³.
  CHECK(low_at < 55'000.0);
  bool reactivated = false;
  for (const auto& r : a.reviews) reactivated |= r.reactivated > 0;
  CHECK(reactivated);
}

TEST_CASE("zero-distance plant collapses to a small constant fleet", "[adaptive]") {
  ProcessConfig c;
  c.fixed_travel = FixedTravel{0.0, 0.0};
  c.road = RoadSpec{2000.0, 1.0, 1.0, 0.0};
  const auto a = simulate_adaptive(c, Fleet{10, 2}, ControlPolicy{});
  CHECK(a.schedule.back().active[0] == 2);
  CHECK(a.run.violations.empty());
}
