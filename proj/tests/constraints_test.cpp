#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "rccsim/constraints.hpp"

using namespace rccsim;

TEST_CASE("check_freshness", "[constraints]") {
  ConstraintSpec spec;
  CHECK_FALSE(check_freshness(0.0, 40.0, 1, spec).has_value());
  CHECK_FALSE(check_freshness(0.0, 45.0, 1, spec).has_value());

  auto late = check_freshness(0.0, 50.0, 7, spec);
  REQUIRE(late.has_value());
  CHECK(late->kind == ViolationKind::kFreshness);
  CHECK(late->magnitude == 5.0);
  CHECK(late->truck_id == 7);
  CHECK(late->time == 50.0);

  spec.compaction_lag = 5.0;
  auto lagged = check_freshness(0.0, 44.0, 2, spec);
  REQUIRE(lagged.has_value());
  CHECK(lagged->magnitude == 4.0);
}

TEST_CASE("check_interarrival on plain arrival times", "[constraints]") {
  const ConstraintSpec spec;
  std::vector<SimTime> steady{10.0, 12.5, 15.0};
  CHECK(check_interarrival(std::span<const SimTime>(steady), spec).empty());

  std::vector<SimTime> gap{10.0, 14.0};
  auto v = check_interarrival(std::span<const SimTime>(gap), spec);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kInterarrival);
  CHECK(v[0].magnitude == 1.0);
  CHECK(v[0].time == 14.0);

  std::vector<SimTime> single{10.0};
  CHECK(check_interarrival(std::span<const SimTime>(single), spec).empty());
  CHECK(check_interarrival(std::span<const SimTime>(), spec).empty());
}

TEST_CASE("check_interarrival measures from the previous departure", "[constraints]") {
  const ConstraintSpec spec;
  // Second truck arrives while the first still dumps: no gap at all.
  std::vector<PaverVisit> queued{{10.0, 13.75, 0}, {12.0, 17.5, 1}};
  CHECK(check_interarrival(std::span<const PaverVisit>(queued), spec).empty());

  // Paver left without a truck for 3.5 minutes.
  std::vector<PaverVisit> late{{10.0, 13.75, 0}, {17.25, 21.0, 1}};
  auto v = check_interarrival(std::span<const PaverVisit>(late), spec);
  REQUIRE(v.size() == 1);
  CHECK(v[0].magnitude == Catch::Approx(0.5));
  CHECK(v[0].truck_id == 1);
}
