#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rccsim/geometry.hpp"

using namespace rccsim;

TEST_CASE("front_position", "[geometry]") {
  const RoadSpec road{44'000.0, 11.0, 0.2, 25'000.0};
  CHECK(front_position(0.0, road) == 0.0);
  CHECK(front_position(96'800.0, road) == Catch::Approx(44'000.0).epsilon(1e-12));
  CHECK(front_position(48'400.0, road) == Catch::Approx(22'000.0).epsilon(1e-12));
  CHECK(front_position(road.total_volume(), road) == road.length);
  CHECK_THROWS_AS(front_position(road.total_volume() + 1.0, road), ModelError);
  CHECK_THROWS_AS(front_position(-1.0, road), ModelError);
}

TEST_CASE("haul_distance", "[geometry]") {
  const RoadSpec road{44'000.0, 11.0, 0.2, 25'000.0};
  CHECK(haul_distance(25'000.0, road) == 0.0);
  CHECK(haul_distance(0.0, road) == 25'000.0);
  CHECK(haul_distance(44'000.0, road) == 19'000.0);
}

TEST_CASE("travel_time", "[geometry]") {
  CHECK(travel_time(0.0, 17.0) == 0.0);
  CHECK(travel_time(25'000.0, 25.0) == Catch::Approx(60.0).epsilon(1e-15));
  CHECK(travel_time(19'000.0, 38.0) == Catch::Approx(30.0).epsilon(1e-15));
}

TEST_CASE("front reaches the road end exactly", "[geometry]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> len(1.0, 100'000.0), wid(0.5, 30.0), thick(0.05, 1.0);
  for (int i = 0; i < 500; ++i) {
    const RoadSpec road{len(rng), wid(rng), thick(rng), 0.0};
    REQUIRE(front_position(road.total_volume(), road) == road.length);
  }
}
