#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "haulmap/config.hpp"
#include "haulmap/geometry.hpp"
#include "haulmap/road_graph.hpp"

namespace haulmap {

// A marked free-drive area or intersection. The polygon is hole-free after
// normalization; entry/exit nodes are covered vertices with an edge arriving
// from outside / leaving to outside.
struct Area {
  std::int64_t id = 0;
  geom::Polygon polygon;
  std::vector<VertexId> entry_nodes;  // sorted
  std::vector<VertexId> exit_nodes;   // sorted
};

struct MarkedMap {
  RoadGraph graph;
  std::vector<Area> areas;  // pairwise interior-disjoint
  int rounds = 0;           // refinement rounds executed, including the quiet one
};

// Raised when refinement fails to settle within round_cap rounds; carries the
// state at the moment of giving up so callers can inspect or export it.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(std::string what, MarkedMap state)
      : std::runtime_error(std::move(what)), partial(std::move(state)) {}

  MarkedMap partial;
};

// Vertex/edge membership relative to the current area list. Vertices on an
// area boundary count as covered. classify_nodes also rewrites each area's
// entry_nodes/exit_nodes in place.
struct NodeClassification {
  std::map<VertexId, std::int64_t> area_of;  // covered vertices only

  struct Crossing {
    std::optional<std::int64_t> from_area;
    std::optional<std::int64_t> to_area;
  };
  // Edges whose endpoints disagree about coverage (boundary crossings).
  std::map<EdgeId, Crossing> crossings;

  bool covered(VertexId v) const { return area_of.count(v) > 0; }
  std::optional<std::int64_t> area(VertexId v) const {
    auto it = area_of.find(v);
    if (it == area_of.end()) return std::nullopt;
    return it->second;
  }
};

// One sector polygon per qualifying edge endpoint:
//   i.  start of each outgoing edge at vertices with out-degree >= 2,
//       bisector along the edge's initial tangent;
//   ii. end of each incoming edge at vertices with in-degree >= 2,
//       bisector along the reversed final tangent;
//   iii. the endpoint of the single edge at total-degree-1 vertices,
//       bisector pointing away from the edge.
// The apex is the first exterior point of each sector. Emission order is
// ascending vertex id, rules i, ii, iii, edges ascending id within a rule.
std::vector<geom::Polygon> place_markers(const RoadGraph& g,
                                         const PipelineConfig& cfg);

// Union of all markers; each component closed individually (dilate by
// area_dilate, erode by area_erode). Components that only met while dilated
// stay separate; components whose closed shapes overlap are merged.
std::vector<Area> initial_areas(const std::vector<geom::Polygon>& markers,
                                const PipelineConfig& cfg);

// Throws InvariantViolation if a vertex is covered by two areas.
NodeClassification classify_nodes(const RoadGraph& g, std::vector<Area>& areas);

// Refinement step 1: inside one area, keep only edges lying on a shortest
// entry->exit path. Candidate edges are those whose polylines the polygon
// covers. Pairs closer than opposite_lane_distance whose outside-edge
// headings are antiparallel within opposite_lane_angle are skipped (opposite
// lanes of one road must not force a U-turn connection). Vertices left
// isolated are dropped. Returns the number of edges removed.
int prune_internal_paths(RoadGraph& g, const Area& area,
                         const NodeClassification& cls,
                         const PipelineConfig& cfg);

// Refinement step 2: edges whose endpoints are both covered by the area but
// whose polyline is not are absorbed by buffering them with path_buffer.
// Returns whether the polygon grew.
bool absorb_internal_edges(const RoadGraph& g, Area& area,
                           const NodeClassification& cls,
                           const PipelineConfig& cfg);

// Refinement step 3: edge runs that leave an area and return to the same
// area with every intermediate vertex outside all areas are buffered by
// path_buffer and absorbed. Returns whether any polygon grew.
bool absorb_return_paths(const RoadGraph& g, std::vector<Area>& areas,
                         const NodeClassification& cls,
                         const PipelineConfig& cfg);

// Refinement step 4: ordered area pairs closer than area_merge_distance and
// joined by at least two edge-disjoint direct paths (intermediate vertices in
// no area, same direction) have those connecting paths buffered into both
// polygons, bridging them. Returns whether any polygon grew.
bool merge_close_areas(const RoadGraph& g, std::vector<Area>& areas,
                       const NodeClassification& cls,
                       const PipelineConfig& cfg);

// Refinement steps 5-7: union overlapping polygons, fill holes, close each
// component by area_erode both ways. Area ids are reassigned in canonical
// geometric order and entry/exit sets cleared for the next classification.
void normalize_areas(std::vector<Area>& areas, const PipelineConfig& cfg);

// Full post-processor: markers, initial areas, then rounds of
// {classify; prune; absorb internal; absorb returns; merge close; normalize}
// until steps 2-4 all report no change in one round. Throws NonConvergence
// after round_cap rounds.
MarkedMap mark_areas(const RoadGraph& g, const PipelineConfig& cfg);

}  // namespace haulmap
