#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "haulmap/area_marking.hpp"
#include "haulmap/errors.hpp"
#include "haulmap/map_inference.hpp"
#include "haulmap/synth.hpp"
#include "haulmap/trace.hpp"
#include "oracles.hpp"

using namespace haulmap;

namespace {

geom::Polygon square(double cx, double cy, double half) {
  geom::Polygon p;
  p.exterior = {{cx - half, cy - half},
                {cx + half, cy - half},
                {cx + half, cy + half},
                {cx - half, cy + half},
                {cx - half, cy - half}};
  return p;
}

Area make_area(std::int64_t id, geom::Polygon poly) {
  Area a;
  a.id = id;
  a.polygon = std::move(poly);
  return a;
}

// Markers anchor their apex at the vertex they were placed for.
std::size_t markers_at(const std::vector<geom::Polygon>& markers, Point p) {
  std::size_t n = 0;
  for (const auto& m : markers) {
    if (geom::distance(m.exterior.front(), p) < 1e-9) ++n;
  }
  return n;
}

Polyline straight(Point a, Point b) { return {a, b}; }

}  // namespace

TEST_CASE("dead ends get one marker each pointing away from the road") {
  RoadGraph g;
  g.add_vertex({0, 0});
  g.add_vertex({100, 0});
  g.add_edge(0, 1, straight({0, 0}, {100, 0}));

  PipelineConfig cfg;
  const auto markers = place_markers(g, cfg);
  REQUIRE(markers.size() == 2);
  CHECK(markers_at(markers, {0, 0}) == 1);
  CHECK(markers_at(markers, {100, 0}) == 1);
  // The start marker opens west, the end marker east.
  CHECK(geom::covers(markers[0], Point{-10, 0}));
  CHECK(!geom::covers(markers[0], Point{10, 0}));
  CHECK(geom::covers(markers[1], Point{110, 0}));
  CHECK(!geom::covers(markers[1], Point{90, 0}));
}

TEST_CASE("a split vertex gets one marker per outgoing edge") {
  RoadGraph g;
  g.add_vertex({-100, 0});   // 0: feeder
  g.add_vertex({0, 0});      // 1: split
  g.add_vertex({100, 100});  // 2
  g.add_vertex({100, -100});
  g.add_edge(0, 1, straight({-100, 0}, {0, 0}));
  g.add_edge(1, 2, straight({0, 0}, {100, 100}));
  g.add_edge(1, 3, straight({0, 0}, {100, -100}));

  PipelineConfig cfg;
  const auto markers = place_markers(g, cfg);
  CHECK(markers.size() == 5);  // 2 at the split, 3 dead ends
  CHECK(markers_at(markers, {0, 0}) == 2);
  // Each split marker opens along its outgoing edge.
  bool covers_up = false, covers_down = false, covers_back = false;
  for (const auto& m : markers) {
    if (geom::distance(m.exterior.front(), {0, 0}) > 1e-9) continue;
    covers_up = covers_up || geom::covers(m, Point{7, 7});
    covers_down = covers_down || geom::covers(m, Point{7, -7});
    covers_back = covers_back || geom::covers(m, Point{-10, 0});
  }
  CHECK(covers_up);
  CHECK(covers_down);
  CHECK(!covers_back);  // the single incoming edge contributes no marker
}

TEST_CASE("a merge vertex gets one marker per incoming edge") {
  RoadGraph g;
  g.add_vertex({-100, 100});
  g.add_vertex({-100, -100});
  g.add_vertex({0, 0});  // 2: merge
  g.add_vertex({100, 0});
  g.add_edge(0, 2, straight({-100, 100}, {0, 0}));
  g.add_edge(1, 2, straight({-100, -100}, {0, 0}));
  g.add_edge(2, 3, straight({0, 0}, {100, 0}));

  PipelineConfig cfg;
  const auto markers = place_markers(g, cfg);
  CHECK(markers.size() == 5);
  CHECK(markers_at(markers, {0, 0}) == 2);
  // Merge markers open back along the incoming edges, not forward.
  bool covers_upper = false, covers_lower = false, covers_fwd = false;
  for (const auto& m : markers) {
    if (geom::distance(m.exterior.front(), {0, 0}) > 1e-9) continue;
    covers_upper = covers_upper || geom::covers(m, Point{-7, 7});
    covers_lower = covers_lower || geom::covers(m, Point{-7, -7});
    covers_fwd = covers_fwd || geom::covers(m, Point{10, 0});
  }
  CHECK(covers_upper);
  CHECK(covers_lower);
  CHECK(!covers_fwd);
}

TEST_CASE("a chain vertex with one edge in and one out gets no marker") {
  RoadGraph g;
  g.add_vertex({0, 0});
  g.add_vertex({60, 0});
  g.add_vertex({120, 0});
  g.add_edge(0, 1, straight({0, 0}, {60, 0}));
  g.add_edge(1, 2, straight({60, 0}, {120, 0}));

  PipelineConfig cfg;
  const auto markers = place_markers(g, cfg);
  CHECK(markers.size() == 2);
  CHECK(markers_at(markers, {60, 0}) == 0);
}

TEST_CASE("a crossing with two lanes each way gets four central markers") {
  RoadGraph g;
  g.add_vertex({-100, 0});  // 0 west stub
  g.add_vertex({0, -100});  // 1 south stub
  g.add_vertex({0, 0});     // 2 centre
  g.add_vertex({100, 0});   // 3 east stub
  g.add_vertex({0, 100});   // 4 north stub
  g.add_edge(0, 2, straight({-100, 0}, {0, 0}));
  g.add_edge(1, 2, straight({0, -100}, {0, 0}));
  g.add_edge(2, 3, straight({0, 0}, {100, 0}));
  g.add_edge(2, 4, straight({0, 0}, {0, 100}));

  PipelineConfig cfg;
  const auto markers = place_markers(g, cfg);
  CHECK(markers.size() == 8);  // 4 central + 4 stub dead ends
  CHECK(markers_at(markers, {0, 0}) == 4);
}

TEST_CASE("initial areas join overlapping markers but not distant ones") {
  PipelineConfig cfg;

  // The two sectors of a split share their apex, so they union into one
  // component; the three dead ends are far away and stay separate.
  RoadGraph g;
  g.add_vertex({-100, 0});
  g.add_vertex({0, 0});
  g.add_vertex({100, 100});
  g.add_vertex({100, -100});
  g.add_edge(0, 1, straight({-100, 0}, {0, 0}));
  g.add_edge(1, 2, straight({0, 0}, {100, 100}));
  g.add_edge(1, 3, straight({0, 0}, {100, -100}));
  const auto areas = initial_areas(place_markers(g, cfg), cfg);
  CHECK(areas.size() == 4);
  for (std::size_t i = 0; i < areas.size(); ++i) {
    CHECK(areas[i].id == static_cast<std::int64_t>(i));
  }
  // Closing leaves the marker apexes interior, not on the boundary.
  const bool split_interior =
      std::any_of(areas.begin(), areas.end(), [&](const Area& a) {
        return geom::interior_contains(a.polygon, Point{0, 0});
      });
  CHECK(split_interior);

  // Dead-end markers 500 m apart stay two components.
  RoadGraph far;
  far.add_vertex({0, 0});
  far.add_vertex({500, 0});
  far.add_edge(0, 1, straight({0, 0}, {500, 0}));
  CHECK(initial_areas(place_markers(far, cfg), cfg).size() == 2);

  CHECK(initial_areas({}, cfg).empty());
}

TEST_CASE("initial areas close slits but keep real gaps open") {
  PipelineConfig cfg;
  // A 1.5 m slit between two squares is far below 2 * erode, so the closing
  // welds them; a 25 m gap exceeds 2 * dilate and survives.
  const auto welded =
      initial_areas({square(0, 0, 15), square(31.5, 0, 15)}, cfg);
  CHECK(welded.size() == 1);
  const auto apart = initial_areas({square(0, 0, 15), square(55, 0, 15)}, cfg);
  CHECK(apart.size() == 2);
}

TEST_CASE("classify_nodes assigns vertices and finds boundary crossings") {
  RoadGraph g;
  g.add_vertex({-50, 0});  // 0 outside
  g.add_vertex({0, 0});    // 1 inside
  g.add_vertex({50, 0});   // 2 outside
  g.add_edge(0, 1, straight({-50, 0}, {0, 0}));
  g.add_edge(1, 2, straight({0, 0}, {50, 0}));

  std::vector<Area> areas;
  areas.push_back(make_area(7, square(0, 0, 10)));
  const auto cls = classify_nodes(g, areas);

  CHECK(cls.area_of.size() == 1);
  CHECK(cls.area(1) == 7);
  CHECK(!cls.covered(0));
  CHECK(!cls.covered(2));
  REQUIRE(cls.crossings.size() == 2);
  CHECK(!cls.crossings.at(0).from_area.has_value());
  CHECK(cls.crossings.at(0).to_area == 7);
  CHECK(cls.crossings.at(1).from_area == 7);
  CHECK(!cls.crossings.at(1).to_area.has_value());
  // The middle vertex is both the entry and the exit of its area.
  CHECK(areas[0].entry_nodes == std::vector<VertexId>{1});
  CHECK(areas[0].exit_nodes == std::vector<VertexId>{1});
}

TEST_CASE("classify_nodes counts the closed boundary as inside") {
  RoadGraph g;
  g.add_vertex({10, 0});  // exactly on the square's edge
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 10)));
  const auto cls = classify_nodes(g, areas);
  CHECK(cls.covered(0));
}

TEST_CASE("classify_nodes annotates an edge between two areas with both ids") {
  RoadGraph g;
  g.add_vertex({0, 0});
  g.add_vertex({100, 0});
  g.add_edge(0, 1, straight({0, 0}, {100, 0}));
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 10)));
  areas.push_back(make_area(1, square(100, 0, 10)));
  const auto cls = classify_nodes(g, areas);
  REQUIRE(cls.crossings.count(0) == 1);
  CHECK(cls.crossings.at(0).from_area == 0);
  CHECK(cls.crossings.at(0).to_area == 1);
  CHECK(areas[0].exit_nodes == std::vector<VertexId>{0});
  CHECK(areas[1].entry_nodes == std::vector<VertexId>{1});
}

TEST_CASE("classify_nodes rejects a vertex claimed by two areas") {
  RoadGraph g;
  g.add_vertex({0, 0});
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 10)));
  areas.push_back(make_area(1, square(5, 0, 10)));
  CHECK_THROWS_AS(classify_nodes(g, areas), InvariantViolation);
}

TEST_CASE("a graph fully outside all areas classifies to empty sets") {
  RoadGraph g;
  g.add_vertex({500, 500});
  g.add_vertex({600, 500});
  g.add_edge(0, 1, straight({500, 500}, {600, 500}));
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 10)));
  const auto cls = classify_nodes(g, areas);
  CHECK(cls.area_of.empty());
  CHECK(cls.crossings.empty());
  CHECK(areas[0].entry_nodes.empty());
  CHECK(areas[0].exit_nodes.empty());
}

TEST_CASE("pruning keeps only shortest entry-exit routes inside an area") {
  RoadGraph g;
  g.add_vertex({-60, 0});  // 0 outside
  g.add_vertex({-20, 0});  // 1 entry
  g.add_vertex({0, 20});   // 2 detour waypoint
  g.add_vertex({20, 0});   // 3 exit
  g.add_vertex({60, 0});   // 4 outside
  g.add_edge(0, 1, straight({-60, 0}, {-20, 0}));            // crossing
  g.add_edge(1, 3, straight({-20, 0}, {20, 0}));             // direct, 40 m
  g.add_edge(1, 2, straight({-20, 0}, {0, 20}));             // detour leg
  g.add_edge(2, 3, straight({0, 20}, {20, 0}));              // detour leg
  g.add_edge(3, 4, straight({20, 0}, {60, 0}));              // crossing

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 30)));
  const auto cls = classify_nodes(g, areas);
  REQUIRE(areas[0].entry_nodes == std::vector<VertexId>{1});
  REQUIRE(areas[0].exit_nodes == std::vector<VertexId>{3});

  // Independent check of what the shortest internal route should keep.
  const auto oracle = oracles::enumerate_paths(g, 1, 3, {1, 2, 3});
  REQUIRE(oracle.has_value());
  CHECK(oracle->edges_on_shortest == std::set<EdgeId>{1});
  CHECK(oracle->path_count == 2);

  PipelineConfig cfg;
  const int removed = prune_internal_paths(g, areas[0], cls, cfg);
  CHECK(removed == 2);
  CHECK(g.find_edge(1, 3).has_value());
  CHECK(!g.find_edge(1, 2).has_value());
  CHECK(!g.find_edge(2, 3).has_value());
  CHECK(!g.has_vertex(2));  // left isolated, dropped
  CHECK(g.has_vertex(0));   // untouched outside the area
}

TEST_CASE("an area with no entries or exits loses all internal edges") {
  RoadGraph g;
  g.add_vertex({-10, 0});
  g.add_vertex({10, 0});
  g.add_edge(0, 1, straight({-10, 0}, {10, 0}));
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 30)));
  const auto cls = classify_nodes(g, areas);
  PipelineConfig cfg;
  CHECK(prune_internal_paths(g, areas[0], cls, cfg) == 1);
  CHECK(g.vertex_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("opposite lanes passing an area are not stitched together") {
  // Eastbound lane enters at (-10,-5); westbound lane leaves at (-10,5).
  // The two boundary vertices are 10 m apart with antiparallel outside
  // headings: connecting them would invent a U-turn.
  RoadGraph g;
  g.add_vertex({-60, -5});  // 0 outside, feeds entry
  g.add_vertex({-10, -5});  // 1 entry
  g.add_vertex({-10, 5});   // 2 exit
  g.add_vertex({-60, 5});   // 3 outside, receives exit
  g.add_edge(0, 1, straight({-60, -5}, {-10, -5}));  // heading east
  g.add_edge(1, 2, straight({-10, -5}, {-10, 5}));   // candidate U-turn
  g.add_edge(2, 3, straight({-10, 5}, {-60, 5}));    // heading west

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 30)));
  const auto cls = classify_nodes(g, areas);
  REQUIRE(areas[0].entry_nodes == std::vector<VertexId>{1});
  REQUIRE(areas[0].exit_nodes == std::vector<VertexId>{2});

  PipelineConfig cfg;
  const int removed = prune_internal_paths(g, areas[0], cls, cfg);
  CHECK(removed == 1);
  CHECK(!g.find_edge(1, 2).has_value());

  SUBCASE("the same pair far enough apart is connected normally") {
    RoadGraph h;
    h.add_vertex({-60, -20});
    h.add_vertex({-10, -20});
    h.add_vertex({-10, 20});  // 40 m from the entry: not an opposite lane
    h.add_vertex({-60, 20});
    h.add_edge(0, 1, straight({-60, -20}, {-10, -20}));
    h.add_edge(1, 2, straight({-10, -20}, {-10, 20}));
    h.add_edge(2, 3, straight({-10, 20}, {-60, 20}));
    std::vector<Area> wide;
    wide.push_back(make_area(0, square(0, 0, 30)));
    const auto wide_cls = classify_nodes(h, wide);
    CHECK(prune_internal_paths(h, wide[0], wide_cls, cfg) == 0);
    CHECK(h.find_edge(1, 2).has_value());
  }
}

TEST_CASE("internal edges bulging out of the polygon are absorbed") {
  RoadGraph g;
  g.add_vertex({5, 20});
  g.add_vertex({35, 20});
  g.add_edge(0, 1, Polyline{{5, 20}, {20, 60}, {35, 20}});

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(20, 20, 20)));
  auto cls = classify_nodes(g, areas);
  REQUIRE(cls.covered(0));
  REQUIRE(cls.covered(1));
  REQUIRE(!geom::covers(areas[0].polygon, g.edge(0).polyline));

  PipelineConfig cfg;
  CHECK(absorb_internal_edges(g, areas[0], cls, cfg));
  CHECK(geom::covers(areas[0].polygon, g.edge(0).polyline));
  // Once covered, a second pass reports no change.
  cls = classify_nodes(g, areas);
  CHECK(!absorb_internal_edges(g, areas[0], cls, cfg));
}

TEST_CASE("edges with an endpoint outside the area do not trigger step 2") {
  RoadGraph g;
  g.add_vertex({5, 20});
  g.add_vertex({200, 20});
  g.add_edge(0, 1, Polyline{{5, 20}, {100, 90}, {200, 20}});
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(20, 20, 20)));
  const auto cls = classify_nodes(g, areas);
  PipelineConfig cfg;
  CHECK(!absorb_internal_edges(g, areas[0], cls, cfg));
}

TEST_CASE("loops leaving and re-entering an area are absorbed") {
  RoadGraph g;
  g.add_vertex({10, 0});   // 0 in area
  g.add_vertex({70, 0});   // 1 outside
  g.add_vertex({70, 10});  // 2 outside
  g.add_vertex({10, 10});  // 3 in area
  g.add_edge(0, 1, straight({10, 0}, {70, 0}));
  g.add_edge(1, 2, straight({70, 0}, {70, 10}));
  g.add_edge(2, 3, straight({70, 10}, {10, 10}));

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 5, 20)));
  const auto cls = classify_nodes(g, areas);
  REQUIRE(cls.covered(0));
  REQUIRE(cls.covered(3));
  REQUIRE(!cls.covered(1));
  REQUIRE(!cls.covered(2));

  PipelineConfig cfg;
  CHECK(absorb_return_paths(g, areas, cls, cfg));
  // The whole loop corridor is now part of the polygon.
  CHECK(geom::covers(areas[0].polygon, Point{70, 5}));
  CHECK(geom::covers(areas[0].polygon, Point{40, 0}));
}

TEST_CASE("a dead-end spur is not a return path") {
  RoadGraph g;
  g.add_vertex({10, 0});
  g.add_vertex({70, 0});  // no way back
  g.add_edge(0, 1, straight({10, 0}, {70, 0}));
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 0, 20)));
  const auto cls = classify_nodes(g, areas);
  PipelineConfig cfg;
  const double before = geom::area(areas[0].polygon);
  CHECK(!absorb_return_paths(g, areas, cls, cfg));
  CHECK(geom::area(areas[0].polygon) == doctest::Approx(before));
}

TEST_CASE("paths that pass through another area are not return paths") {
  RoadGraph g;
  g.add_vertex({0, 0});    // 0 in P
  g.add_vertex({100, 0});  // 1 in Q
  g.add_vertex({0, 30});   // 2 in P again
  g.add_edge(0, 1, straight({0, 0}, {100, 0}));
  g.add_edge(1, 2, straight({100, 0}, {0, 30}));

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(0, 15, 20)));    // P holds 0 and 2
  areas.push_back(make_area(1, square(100, 0, 10)));   // Q holds 1
  const auto cls = classify_nodes(g, areas);
  REQUIRE(cls.area(0) == 0);
  REQUIRE(cls.area(1) == 1);
  REQUIRE(cls.area(2) == 0);
  PipelineConfig cfg;
  CHECK(!absorb_return_paths(g, areas, cls, cfg));
}

TEST_CASE("close areas with two same-direction paths are bridged") {
  RoadGraph g;
  g.add_vertex({10, 10});  // 0 in P
  g.add_vertex({10, 30});  // 1 in P
  g.add_vertex({40, 10});  // 2 in Q
  g.add_vertex({40, 30});  // 3 in Q
  g.add_edge(0, 2, straight({10, 10}, {40, 10}));
  g.add_edge(1, 3, straight({10, 30}, {40, 30}));

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(10, 20, 10)));  // P: x in [0,20]
  areas.push_back(make_area(1, square(40, 20, 10)));  // Q: x in [30,50]
  const auto cls = classify_nodes(g, areas);
  REQUIRE(geom::distance(areas[0].polygon, areas[1].polygon) ==
          doctest::Approx(10));

  PipelineConfig cfg;
  CHECK(merge_close_areas(g, areas, cls, cfg));
  // Both polygons picked up the connecting corridors: after a union they
  // form one component.
  const auto merged = geom::union_all({areas[0].polygon, areas[1].polygon});
  CHECK(merged.size() == 1);
}

TEST_CASE("one path each way does not bridge two areas") {
  RoadGraph g;
  g.add_vertex({10, 10});
  g.add_vertex({10, 30});
  g.add_vertex({40, 10});
  g.add_vertex({40, 30});
  g.add_edge(0, 2, straight({10, 10}, {40, 10}));  // P -> Q
  g.add_edge(3, 1, straight({40, 30}, {10, 30}));  // Q -> P

  std::vector<Area> areas;
  areas.push_back(make_area(0, square(10, 20, 10)));
  areas.push_back(make_area(1, square(40, 20, 10)));
  const auto cls = classify_nodes(g, areas);
  PipelineConfig cfg;
  CHECK(!merge_close_areas(g, areas, cls, cfg));
}

TEST_CASE("distant areas are never bridged") {
  RoadGraph g;
  g.add_vertex({10, 10});
  g.add_vertex({10, 30});
  g.add_vertex({210, 10});
  g.add_vertex({210, 30});
  g.add_edge(0, 2, straight({10, 10}, {210, 10}));
  g.add_edge(1, 3, straight({10, 30}, {210, 30}));
  std::vector<Area> areas;
  areas.push_back(make_area(0, square(10, 20, 10)));
  areas.push_back(make_area(1, square(210, 20, 10)));
  const auto cls = classify_nodes(g, areas);
  PipelineConfig cfg;
  CHECK(!merge_close_areas(g, areas, cls, cfg));
}

TEST_CASE("paths through a third area do not count as direct") {
  // Two parallel connections from P to Q; the lower one transits a small
  // third area R, so only the upper one is "direct".
  RoadGraph g;
  g.add_vertex({10, 19});  // 0 in P
  g.add_vertex({25, 19});  // 1 in R
  g.add_vertex({40, 19});  // 2 in Q
  g.add_vertex({10, 31});  // 3 in P
  g.add_vertex({25, 31});  // 4 uncovered
  g.add_vertex({40, 31});  // 5 in Q
  g.add_edge(0, 1, straight({10, 19}, {25, 19}));
  g.add_edge(1, 2, straight({25, 19}, {40, 19}));
  g.add_edge(3, 4, straight({10, 31}, {25, 31}));
  g.add_edge(4, 5, straight({25, 31}, {40, 31}));
  PipelineConfig cfg;

  SUBCASE("with the blocker, no pair reaches two direct paths") {
    std::vector<Area> areas;
    areas.push_back(make_area(0, square(10, 20, 12)));
    areas.push_back(make_area(1, square(40, 20, 12)));
    areas.push_back(make_area(2, square(25, 19, 2)));
    const auto cls = classify_nodes(g, areas);
    REQUIRE(cls.area(1) == 2);
    REQUIRE(!cls.covered(4));
    CHECK(!merge_close_areas(g, areas, cls, cfg));
  }

  SUBCASE("without it, the same geometry bridges P and Q") {
    std::vector<Area> areas;
    areas.push_back(make_area(0, square(10, 20, 12)));
    areas.push_back(make_area(1, square(40, 20, 12)));
    const auto cls = classify_nodes(g, areas);
    REQUIRE(!cls.covered(1));
    REQUIRE(!cls.covered(4));
    CHECK(merge_close_areas(g, areas, cls, cfg));
  }
}

TEST_CASE("normalization unions overlaps, fills holes and renumbers") {
  PipelineConfig cfg;

  SUBCASE("overlapping polygons become one") {
    std::vector<Area> areas;
    areas.push_back(make_area(3, square(20, 20, 20)));
    areas.push_back(make_area(9, square(40, 20, 20)));
    areas[0].entry_nodes = {1, 2};
    normalize_areas(areas, cfg);
    REQUIRE(areas.size() == 1);
    CHECK(areas[0].id == 0);
    CHECK(areas[0].entry_nodes.empty());
    CHECK(geom::area(areas[0].polygon) == doctest::Approx(2400).epsilon(0.01));
  }

  SUBCASE("holes are filled") {
    geom::Polygon holed = square(30, 30, 30);
    holed.holes.push_back({{20, 20}, {20, 40}, {40, 40}, {40, 20}, {20, 20}});
    std::vector<Area> areas;
    areas.push_back(make_area(0, holed));
    normalize_areas(areas, cfg);
    REQUIRE(areas.size() == 1);
    CHECK(areas[0].polygon.holes.empty());
    CHECK(geom::area(areas[0].polygon) == doctest::Approx(3600).epsilon(0.01));
    CHECK(geom::covers(areas[0].polygon, Point{30, 30}));
  }

  SUBCASE("far-apart components keep their count and sort by position") {
    std::vector<Area> areas;
    areas.push_back(make_area(0, square(300, 0, 20)));
    areas.push_back(make_area(1, square(0, 0, 20)));
    normalize_areas(areas, cfg);
    REQUIRE(areas.size() == 2);
    CHECK(areas[0].id == 0);
    CHECK(geom::covers(areas[0].polygon, Point{0, 0}));
    CHECK(geom::covers(areas[1].polygon, Point{300, 0}));
  }
}

TEST_CASE("marking a straight chain yields two dead-end areas") {
  RoadGraph g;
  g.add_vertex({0, 0});
  g.add_vertex({200, 0});
  g.add_vertex({400, 0});
  g.add_edge(0, 1, straight({0, 0}, {200, 0}));
  g.add_edge(1, 2, straight({200, 0}, {400, 0}));

  PipelineConfig cfg;
  const MarkedMap m = mark_areas(g, cfg);
  CHECK(m.rounds == 1);
  REQUIRE(m.areas.size() == 2);
  // The chain itself is untouched.
  CHECK(m.graph.edge_count() == 2);
  CHECK(m.graph.vertex_count() == 3);
  CHECK(m.graph.has_vertex(1));
  // Dead-end vertices sit inside their areas; the middle vertex is outside.
  CHECK(geom::interior_contains(m.areas[0].polygon, Point{0, 0}));
  CHECK(geom::interior_contains(m.areas[1].polygon, Point{400, 0}));
  CHECK(!geom::covers(m.areas[0].polygon, Point{200, 0}));
  CHECK(!geom::covers(m.areas[1].polygon, Point{200, 0}));
  // The start area can only exit (an edge leaves it); the end only enter.
  CHECK(m.areas[0].entry_nodes.empty());
  CHECK(m.areas[0].exit_nodes == std::vector<VertexId>{0});
  CHECK(m.areas[1].entry_nodes == std::vector<VertexId>{2});
  CHECK(m.areas[1].exit_nodes.empty());
}

TEST_CASE("marking an empty graph yields an empty map") {
  PipelineConfig cfg;
  const MarkedMap m = mark_areas(RoadGraph{}, cfg);
  CHECK(m.areas.empty());
  CHECK(m.rounds == 0);
  CHECK(m.graph.vertex_count() == 0);
}

TEST_CASE("a tight round cap raises non-convergence with the partial state") {
  // The crossing scenario needs a second round for its first quiet pass, so a
  // cap of one round must fail and hand back the state reached so far.
  const Scenario scenario = builtin_scenario("four_way");
  PipelineConfig cfg;
  const auto trips = segment_all(generate_trips(scenario), cfg);
  const RoadGraph g = infer_graph(trips, cfg);

  PipelineConfig capped = cfg;
  capped.round_cap = 1;
  bool thrown = false;
  try {
    mark_areas(g, capped);
  } catch (const NonConvergence& e) {
    thrown = true;
    CHECK(e.partial.rounds == 1);
    CHECK(!e.partial.areas.empty());
    CHECK(e.partial.graph.vertex_count() > 0);
  }
  CHECK(thrown);

  // With the default cap the same input settles quickly.
  const MarkedMap m = mark_areas(g, cfg);
  CHECK(m.rounds >= 2);
  CHECK(m.rounds <= 10);

  // Every junction vertex ends up strictly inside an area.
  for (VertexId vid : m.graph.vertex_ids()) {
    const auto [in_deg, out_deg] = m.graph.degrees(vid);
    if (in_deg <= 1 && out_deg <= 1) continue;
    const Point pos = m.graph.vertex(vid).position;
    const bool interior =
        std::any_of(m.areas.begin(), m.areas.end(), [&](const Area& a) {
          return geom::interior_contains(a.polygon, pos);
        });
    CHECK(interior);
  }
}
