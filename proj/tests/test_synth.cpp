#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "haulmap/errors.hpp"
#include "haulmap/map_inference.hpp"
#include "haulmap/synth.hpp"
#include "haulmap/trace.hpp"

using namespace haulmap;

TEST_CASE("builtin scenarios exist and unknown names are rejected") {
  const auto names = builtin_scenario_names();
  CHECK(names == std::vector<std::string>{"bench", "four_way", "loop",
                                          "two_lane", "y_merge"});
  for (const auto& name : names) {
    const Scenario s = builtin_scenario(name);
    CHECK(!s.lanes.empty());
    CHECK(!s.trips.empty());
  }
  CHECK_THROWS_AS(builtin_scenario("motorway"), InvariantViolation);
}

TEST_CASE("a 120 m lane at 2 m/s sampled every 6 s gives 11 points") {
  Scenario s;
  s.lanes.push_back({{0, 0}, {120, 0}});
  s.trips.push_back({{0}, 2.0});
  s.noise_sigma = 0.0;
  const auto traces = generate_trips(s);
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].points.size() == 11);
  for (std::size_t i = 0; i < 11; ++i) {
    CHECK(traces[0].points[i].timestamp == doctest::Approx(6.0 * i));
    CHECK(traces[0].points[i].position.x == doctest::Approx(12.0 * i));
    CHECK(traces[0].points[i].position.y == doctest::Approx(0.0));
  }
  CHECK(traces[0].truck_id == "truck000");
}

TEST_CASE("lane ends are represented when the cadence misses them") {
  Scenario s;
  s.lanes.push_back({{0, 0}, {100, 0}});  // 100 m at 12 m per sample
  s.trips.push_back({{0}, 2.0});
  const auto traces = generate_trips(s);
  // Samples at 0,12,...,96 plus the appended endpoint.
  REQUIRE(traces[0].points.size() == 10);
  CHECK(traces[0].points.back().position.x == doctest::Approx(100.0));
  CHECK(traces[0].points.back().timestamp == doctest::Approx(50.0));

  // A shortfall under a quarter step is not worth an extra sample.
  Scenario close_enough;
  close_enough.lanes.push_back({{0, 0}, {98, 0}});
  close_enough.trips.push_back({{0}, 2.0});
  const auto t2 = generate_trips(close_enough);
  CHECK(t2[0].points.size() == 9);  // 0..96, endpoint 98 only 2 m past
}

TEST_CASE("trips concatenate lanes without duplicating shared joints") {
  Scenario s;
  s.lanes.push_back({{0, 0}, {60, 0}});
  s.lanes.push_back({{60, 0}, {60, 60}});
  s.trips.push_back({{0, 1}, 10.0});
  const auto traces = generate_trips(s);
  REQUIRE(traces[0].points.size() == 3);
  CHECK(traces[0].points[1].position.x == doctest::Approx(60.0));
  CHECK(traces[0].points[2].position.y == doctest::Approx(60.0));
}

TEST_CASE("generation is a pure function of the seed") {
  Scenario s = builtin_scenario("two_lane");
  const auto a = generate_trips(s);
  const auto b = generate_trips(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].points.size() == b[i].points.size());
    for (std::size_t j = 0; j < a[i].points.size(); ++j) {
      CHECK(a[i].points[j].position.x == b[i].points[j].position.x);
      CHECK(a[i].points[j].position.y == b[i].points[j].position.y);
    }
  }
  s.rng_seed += 1;
  const auto c = generate_trips(s);
  bool any_different = false;
  for (std::size_t j = 0; j < a[0].points.size(); ++j) {
    any_different |= a[0].points[j].position.x != c[0].points[j].position.x;
  }
  CHECK(any_different);
}

TEST_CASE("noise magnitude matches the configured sigma") {
  Scenario s;
  s.lanes.push_back({{0, 0}, {6000, 0}});
  s.trips.push_back({{0}, 10.0});
  s.noise_sigma = 2.0;
  s.rng_seed = 5;
  const auto traces = generate_trips(s);
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& p : traces[0].points) {
    sum_sq += p.position.y * p.position.y;  // truth is y = 0
    ++n;
  }
  // Sample standard deviation should be within 25% of sigma for n ~ 100.
  const double sd = std::sqrt(sum_sq / n);
  CHECK(sd > 1.5);
  CHECK(sd < 2.5);
}

TEST_CASE("scenario files parse with line-accurate errors") {
  std::istringstream good(
      "# a miniature pit\n"
      "noise_sigma = 0.5\n"
      "sample_period = 3\n"
      "rng_seed = 12\n"
      "lane = 0,0 100,0 100,50\n"
      "lane = 100,50 0,50\n"
      "trip = 0 1 @ 5\n"
      "trip = 0 @ 10\n");
  const Scenario s = load_scenario(good);
  CHECK(s.noise_sigma == doctest::Approx(0.5));
  CHECK(s.sample_period == doctest::Approx(3.0));
  CHECK(s.rng_seed == 12);
  REQUIRE(s.lanes.size() == 2);
  CHECK(s.lanes[0].size() == 3);
  REQUIRE(s.trips.size() == 2);
  CHECK(s.trips[0].lanes == std::vector<std::size_t>{0, 1});
  CHECK(s.trips[0].speed == doctest::Approx(5.0));

  std::istringstream unknown("lane = 0,0 1,1\nspeed_limit = 90\n");
  CHECK_THROWS_WITH_AS(load_scenario(unknown), doctest::Contains("line 2"),
                       ParseError);

  std::istringstream bad_point("lane = 0,0 oops\n");
  CHECK_THROWS_AS(load_scenario(bad_point), ParseError);

  std::istringstream no_speed("lane = 0,0 1,1\ntrip = 0\n");
  CHECK_THROWS_AS(load_scenario(no_speed), ParseError);

  std::istringstream dangling("lane = 0,0 9,9\ntrip = 4 @ 10\n");
  CHECK_THROWS_AS(load_scenario(dangling), ParseError);
}

TEST_CASE("evaluate scores a perfect graph and an empty graph sensibly") {
  Scenario s;
  s.lanes.push_back({{0, 0}, {100, 0}});

  RoadGraph g;
  g.add_vertex({0, 0});
  g.add_vertex({100, 0});
  g.add_edge(0, 1, Polyline{{0, 0}, {100, 0}});
  const auto perfect = evaluate(g, s, 10.0);
  CHECK(perfect.coverage == doctest::Approx(1.0));
  CHECK(perfect.precision == doctest::Approx(1.0));
  REQUIRE(perfect.mean_offset.has_value());
  CHECK(*perfect.mean_offset == doctest::Approx(0.0));

  const auto empty = evaluate(RoadGraph{}, s, 10.0);
  CHECK(empty.coverage == doctest::Approx(0.0));
  CHECK(empty.precision == doctest::Approx(1.0));
  CHECK(!empty.mean_offset.has_value());
}

TEST_CASE("evaluate measures partial coverage by arc length") {
  Scenario s;
  s.lanes.push_back({{0, 0}, {200, 0}});

  // Graph covers only the first half plus the tolerance reach.
  RoadGraph g;
  g.add_vertex({0, 0});
  g.add_vertex({100, 0});
  g.add_edge(0, 1, Polyline{{0, 0}, {100, 0}});
  const auto half = evaluate(g, s, 5.0);
  // Lane samples 0..200: covered while x <= 105 of 201 samples.
  CHECK(half.coverage == doctest::Approx(106.0 / 201.0));
  CHECK(half.precision == doctest::Approx(1.0));

  // A graph edge far from any lane hurts precision and mean offset.
  RoadGraph off;
  off.add_vertex({0, 100});
  off.add_vertex({100, 100});
  off.add_edge(0, 1, Polyline{{0, 100}, {100, 100}});
  const auto bad = evaluate(off, s, 5.0);
  CHECK(bad.precision == doctest::Approx(0.0));
  REQUIRE(bad.mean_offset.has_value());
  CHECK(*bad.mean_offset == doctest::Approx(100.0));
}
