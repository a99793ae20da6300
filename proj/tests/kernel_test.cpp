#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "rccsim/kernel.hpp"

using namespace rccsim;

namespace {

std::vector<std::string> labels(const EventTrace& trace) {
  std::vector<std::string> out;
  for (const auto& e : trace) out.push_back(e.label);
  return out;
}

}  // namespace

TEST_CASE("calendar orders by time, then priority, then insertion", "[kernel]") {
  Kernel k;
  k.schedule(5.0, 0, "A", {});
  k.schedule(3.0, 0, "B", {});
  k.run_until(100.0);
  CHECK(labels(k.trace()) == std::vector<std::string>{"B", "A"});

  Kernel p;
  p.schedule(1.0, 1, "low", {});
  p.schedule(1.0, 0, "high", {});
  p.run_until(1.0);
  CHECK(labels(p.trace()) == std::vector<std::string>{"high", "low"});

  Kernel s;
  s.schedule(2.0, 3, "first", {});
  s.schedule(2.0, 3, "second", {});
  s.schedule(2.0, 3, "third", {});
  s.run_until(2.0);
  CHECK(labels(s.trace()) == std::vector<std::string>{"first", "second", "third"});
}

TEST_CASE("event at now fires before a later one scheduled earlier", "[kernel]") {
  Kernel k;
  k.schedule(1e-12, 0, "later", {});
  k.schedule(0.0, 9, "now", {});
  k.run_until(1.0);
  CHECK(labels(k.trace()) == std::vector<std::string>{"now", "later"});
}

TEST_CASE("scheduling in the past is a hard error", "[kernel]") {
  Kernel k;
  k.schedule(4.0, 0, "x", {});
  k.run_until(4.0);
  CHECK_THROWS_AS(k.schedule(3.0, 0, "past", {}), SchedulingError);
  CHECK_NOTHROW(k.schedule(4.0, 0, "now", {}));
}

TEST_CASE("cancelled events never fire", "[kernel]") {
  Kernel k;
  int fired = 0;
  auto h = k.schedule(1.0, 0, "victim", [&] { ++fired; });
  k.schedule(0.5, 0, "killer", [&] { k.cancel(h); });
  k.run_until(10.0);
  CHECK(fired == 0);
  CHECK(labels(k.trace()) == std::vector<std::string>{"killer"});
  CHECK_FALSE(k.cancel(h));
}

TEST_CASE("run_until predicate", "[kernel]") {
  SECTION("already satisfied returns immediately with empty trace") {
    Kernel k;
    double placed = 0.0;
    k.run_until([&] { return placed == 0.0; });
    CHECK(k.trace().empty());
  }
  SECTION("starved calendar throws") {
    Kernel k;
    bool done = false;
    k.schedule(1.0, 0, "noop", {});
    CHECK_THROWS_AS(k.run_until([&] { return done; }), StarvedModel);
  }
  SECTION("clock stops at the completing event") {
    Kernel k;
    bool done = false;
    k.schedule(2.0, 0, "finish", [&] { done = true; });
    k.schedule(3.0, 0, "after", {});
    k.run_until([&] { return done; });
    CHECK(k.now() == 2.0);
    CHECK(k.pending() == 1);
  }
}

TEST_CASE("fired times are non-decreasing and runs are repeatable", "[kernel][property]") {
  auto build = [](Kernel& k) {
    // A self-rescheduling chain interleaved with fixed events.
    std::function<void(int)> chain = [&k, &chain](int n) {
      if (n == 0) return;
      k.schedule(k.now() + 0.7 * n, n % 3, "chain" + std::to_string(n), [&chain, n] { chain(n - 1); });
    };
    for (int i = 0; i < 20; ++i) k.schedule(i * 1.3, i % 2, "fixed" + std::to_string(i), {});
    chain(15);
    k.run_until(1e9);
  };
  Kernel a;
  Kernel b;
  build(a);
  build(b);
  REQUIRE(a.trace().size() == 35);
  CHECK(a.trace() == b.trace());
  for (std::size_t i = 1; i < a.trace().size(); ++i) {
    CHECK(a.trace()[i - 1].time <= a.trace()[i].time);
  }
}

TEST_CASE("time_to_cross", "[kernel][continuous]") {
  CHECK(time_to_cross({10.0, -1.0, 0.0}, 0.0, 0.0) == 10.0);
  CHECK_FALSE(time_to_cross({10.0, 0.0, 0.0}, 0.0, 0.0).has_value());
  CHECK(time_to_cross({2.5, -0.5, 0.0}, 1.0, 0.0) == 3.0);
  // Relative to a later now: level 2.5 at t=4 means crossing at 7.
  CHECK(time_to_cross({4.5, -0.5, 0.0}, 1.0, 4.0) == 7.0);
  // Moving away from the threshold never crosses.
  CHECK_FALSE(time_to_cross({3.0, 1.0, 0.0}, 0.0, 0.0).has_value());
}

TEST_CASE("update_rate", "[kernel][continuous]") {
  const ContinuousLevel lv{5.0, -1.0, 0.0};
  const auto up = update_rate(lv, 2.0, 2.0);
  CHECK(up.level == 3.0);
  CHECK(up.rate == 2.0);
  CHECK(up.last_update == 2.0);

  const auto same = update_rate(lv, -1.0, 1.0);
  CHECK(same.level == 4.0);
  CHECK(time_to_cross(same, 0.0, 1.0) == time_to_cross(lv, 0.0, 1.0));

  // Dump begins while the paver consumes: -1 becomes +3-1 = +2, no crossing.
  const ContinuousLevel hopper{4.0, -1.0, 0.0};
  REQUIRE(time_to_cross(hopper, 0.0, 0.0) == 4.0);
  const auto dumping = update_rate(hopper, 3.0 - 1.0, 1.0);
  CHECK(dumping.level == 3.0);
  CHECK_FALSE(time_to_cross(dumping, 0.0, 1.0).has_value());

  CHECK_THROWS_AS(update_rate({1.0, -1.0, 0.0}, 0.0, 2.0), ConservationError);
  CHECK(update_rate({1.0, -1.0, 0.0}, 0.0, 1.0 + 1e-12).level == 0.0);
  CHECK_THROWS_AS(update_rate({1.0, -1.0, 5.0}, 0.0, 4.0), SchedulingError);
}
