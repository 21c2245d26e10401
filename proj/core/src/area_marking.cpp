#include "haulmap/area_marking.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <utility>

#include "haulmap/errors.hpp"

namespace haulmap {

namespace {

// Polygon growth below this is arc-reapproximation noise, not a real change.
constexpr double kAreaEpsilon = 1e-6;

// Unions additions into the area polygon; reports whether it really grew.
bool grow_area(Area& area, geom::MultiPolygon additions) {
  const double before = geom::area(area.polygon);
  additions.push_back(area.polygon);
  geom::MultiPolygon merged = geom::union_all(additions);
  if (merged.size() != 1)
    throw InvariantViolation("area " + std::to_string(area.id) +
                             " update produced disjoint parts");
  const double after = geom::area(merged);
  area.polygon = std::move(merged.front());
  return after - before > kAreaEpsilon;
}

void drop_isolated_vertices(RoadGraph& g) {
  for (VertexId vid : g.vertex_ids()) {
    auto [in, out] = g.degrees(vid);
    if (in == 0 && out == 0) g.remove_vertex(vid);
  }
}

std::vector<Area> areas_from_shapes(geom::MultiPolygon shapes) {
  geom::canonical_order(shapes);
  std::vector<Area> areas;
  areas.reserve(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    Area a;
    a.id = static_cast<std::int64_t>(i);
    a.polygon = std::move(shapes[i]);
    areas.push_back(std::move(a));
  }
  return areas;
}

}  // namespace

std::vector<geom::Polygon> place_markers(const RoadGraph& g,
                                         const PipelineConfig& cfg) {
  std::vector<geom::Polygon> markers;
  auto sector = [&](Point apex, double direction) {
    return geom::make_sector(apex, direction, cfg.marker_radius,
                             cfg.marker_angle, cfg.arc_segments);
  };

  for (VertexId vid : g.vertex_ids()) {
    const auto [in_deg, out_deg] = g.degrees(vid);
    const Point pos = g.vertex(vid).position;
    if (out_deg >= 2) {
      for (EdgeId eid : g.out_edges(vid))
        markers.push_back(sector(pos, g.edge(eid).initial_heading()));
    }
    if (in_deg >= 2) {
      for (EdgeId eid : g.in_edges(vid))
        markers.push_back(sector(
            pos, geom::normalize_angle(g.edge(eid).final_heading() + geom::pi)));
    }
    if (in_deg + out_deg == 1) {
      if (out_deg == 1) {
        const Edge& e = g.edge(g.out_edges(vid).front());
        markers.push_back(sector(
            pos, geom::normalize_angle(e.initial_heading() + geom::pi)));
      } else {
        const Edge& e = g.edge(g.in_edges(vid).front());
        markers.push_back(sector(pos, e.final_heading()));
      }
    }
  }
  return markers;
}

std::vector<Area> initial_areas(const std::vector<geom::Polygon>& markers,
                                const PipelineConfig& cfg) {
  geom::MultiPolygon merged = geom::union_all(markers);
  geom::MultiPolygon closed = geom::close_components(
      merged, cfg.area_dilate, cfg.area_erode, cfg.arc_segments);
  return areas_from_shapes(std::move(closed));
}

NodeClassification classify_nodes(const RoadGraph& g,
                                  std::vector<Area>& areas) {
  NodeClassification cls;
  std::map<std::int64_t, Area*> by_id;
  for (Area& a : areas) {
    a.entry_nodes.clear();
    a.exit_nodes.clear();
    by_id[a.id] = &a;
  }

  for (VertexId vid : g.vertex_ids()) {
    const Point p = g.vertex(vid).position;
    std::optional<std::int64_t> owner;
    for (const Area& a : areas) {
      if (!geom::covers(a.polygon, p)) continue;
      if (owner)
        throw InvariantViolation(
            "vertex " + std::to_string(vid) + " covered by areas " +
            std::to_string(*owner) + " and " + std::to_string(a.id));
      owner = a.id;
    }
    if (owner) cls.area_of[vid] = *owner;
  }

  std::map<std::int64_t, std::set<VertexId>> entries;
  std::map<std::int64_t, std::set<VertexId>> exits;
  for (EdgeId eid : g.edge_ids()) {
    const Edge& e = g.edge(eid);
    const auto from_area = cls.area(e.from);
    const auto to_area = cls.area(e.to);
    if (from_area == to_area) continue;
    cls.crossings[eid] = {from_area, to_area};
    if (to_area) entries[*to_area].insert(e.to);
    if (from_area) exits[*from_area].insert(e.from);
  }
  for (const auto& [id, nodes] : entries)
    by_id.at(id)->entry_nodes.assign(nodes.begin(), nodes.end());
  for (const auto& [id, nodes] : exits)
    by_id.at(id)->exit_nodes.assign(nodes.begin(), nodes.end());
  return cls;
}

int prune_internal_paths(RoadGraph& g, const Area& area,
                         const NodeClassification& cls,
                         const PipelineConfig& cfg) {
  std::set<EdgeId> candidates;
  for (EdgeId eid : g.edge_ids())
    if (geom::covers(area.polygon, g.edge(eid).polyline))
      candidates.insert(eid);
  if (candidates.empty()) return 0;

  auto outside = [&](VertexId v) { return cls.area(v) != area.id; };

  // Entry/exit pairs that are just the two lanes of one road passing the
  // area must not force a U-turn connection through it.
  auto opposite_lanes = [&](VertexId entry, VertexId exit) {
    if (geom::distance(g.vertex(entry).position, g.vertex(exit).position) >=
        cfg.opposite_lane_distance)
      return false;
    for (EdgeId in_id : g.in_edges(entry)) {
      const Edge& in_e = g.edge(in_id);
      if (!outside(in_e.from)) continue;
      for (EdgeId out_id : g.out_edges(exit)) {
        const Edge& out_e = g.edge(out_id);
        if (!outside(out_e.to)) continue;
        if (geom::circular_diff(in_e.final_heading(),
                                out_e.initial_heading()) >
            geom::pi - cfg.opposite_lane_angle)
          return true;
      }
    }
    return false;
  };

  auto filter = [&](const Edge& e) { return candidates.count(e.id) > 0; };
  std::set<EdgeId> keep;
  for (VertexId entry : area.entry_nodes) {
    for (VertexId exit : area.exit_nodes) {
      if (entry == exit) continue;
      if (opposite_lanes(entry, exit)) continue;
      auto path = g.shortest_path(entry, exit, filter);
      if (path) keep.insert(path->edges.begin(), path->edges.end());
    }
  }

  int removed = 0;
  for (EdgeId eid : candidates) {
    if (keep.count(eid)) continue;
    g.remove_edge(eid);
    ++removed;
  }
  if (removed > 0) drop_isolated_vertices(g);
  return removed;
}

bool absorb_internal_edges(const RoadGraph& g, Area& area,
                           const NodeClassification& cls,
                           const PipelineConfig& cfg) {
  geom::MultiPolygon corridors;
  for (EdgeId eid : g.edge_ids()) {
    const Edge& e = g.edge(eid);
    if (cls.area(e.from) != area.id || cls.area(e.to) != area.id) continue;
    if (geom::covers(area.polygon, e.polyline)) continue;
    corridors.push_back(
        geom::buffer_polyline(e.polyline, cfg.path_buffer, cfg.arc_segments));
  }
  if (corridors.empty()) return false;
  return grow_area(area, std::move(corridors));
}

bool absorb_return_paths(const RoadGraph& g, std::vector<Area>& areas,
                         const NodeClassification& cls,
                         const PipelineConfig& cfg) {
  bool changed = false;
  for (Area& area : areas) {
    auto in_area = [&](VertexId v) { return cls.area(v) == area.id; };
    auto uncovered = [&](VertexId v) { return !cls.covered(v); };

    // Uncovered vertices reachable from this area through uncovered vertices
    // (forward), and those that reach it the same way (backward).
    std::set<VertexId> fwd;
    std::set<VertexId> bwd;
    std::deque<VertexId> queue;
    for (EdgeId eid : g.edge_ids()) {
      const Edge& e = g.edge(eid);
      if (in_area(e.from) && uncovered(e.to) && fwd.insert(e.to).second)
        queue.push_back(e.to);
    }
    while (!queue.empty()) {
      VertexId u = queue.front();
      queue.pop_front();
      for (EdgeId eid : g.out_edges(u)) {
        VertexId v = g.edge(eid).to;
        if (uncovered(v) && fwd.insert(v).second) queue.push_back(v);
      }
    }
    for (EdgeId eid : g.edge_ids()) {
      const Edge& e = g.edge(eid);
      if (in_area(e.to) && uncovered(e.from) && bwd.insert(e.from).second)
        queue.push_back(e.from);
    }
    while (!queue.empty()) {
      VertexId u = queue.front();
      queue.pop_front();
      for (EdgeId eid : g.in_edges(u)) {
        VertexId v = g.edge(eid).from;
        if (uncovered(v) && bwd.insert(v).second) queue.push_back(v);
      }
    }

    // An edge is on a return run when it leaves the area into a vertex that
    // can come back, arrives from a vertex the area can reach, or connects
    // two such outside vertices.
    geom::MultiPolygon corridors;
    for (EdgeId eid : g.edge_ids()) {
      const Edge& e = g.edge(eid);
      const bool on_run =
          (in_area(e.from) && bwd.count(e.to)) ||
          (fwd.count(e.from) && in_area(e.to)) ||
          (fwd.count(e.from) && bwd.count(e.to));
      if (!on_run) continue;
      corridors.push_back(
          geom::buffer_polyline(e.polyline, cfg.path_buffer, cfg.arc_segments));
    }
    if (corridors.empty()) continue;
    const bool grew = grow_area(area, std::move(corridors));
    changed = changed || grew;
  }
  return changed;
}

namespace {

// Unit-capacity max-flow between two areas over direct paths (intermediate
// vertices in no area), capped at two augmenting rounds. Returns the number
// of edge-disjoint paths found and the edges carrying flow.
struct DirectPaths {
  int count = 0;
  std::set<EdgeId> edges;
};

DirectPaths direct_paths(const RoadGraph& g, const NodeClassification& cls,
                         std::int64_t from_id, std::int64_t to_id) {
  auto allowed = [&](const Edge& e) {
    const auto fa = cls.area(e.from);
    const auto ta = cls.area(e.to);
    const bool from_ok = fa == from_id || !fa.has_value();
    const bool to_ok = ta == to_id || !ta.has_value();
    return from_ok && to_ok;
  };
  auto is_sink = [&](VertexId v) { return cls.area(v) == to_id; };

  std::map<EdgeId, int> flow;
  DirectPaths result;
  for (int round = 0; round < 2; ++round) {
    std::map<VertexId, std::pair<EdgeId, bool>> parent;  // edge, forward?
    std::set<VertexId> visited;
    std::deque<VertexId> queue;
    for (const auto& [vid, aid] : cls.area_of) {
      if (aid != from_id) continue;
      visited.insert(vid);
      queue.push_back(vid);
    }
    std::optional<VertexId> sink;
    while (!queue.empty() && !sink) {
      VertexId u = queue.front();
      queue.pop_front();
      for (EdgeId eid : g.out_edges(u)) {
        const Edge& e = g.edge(eid);
        if (!allowed(e) || flow[eid] == 1) continue;
        if (!visited.insert(e.to).second) continue;
        parent[e.to] = {eid, true};
        if (is_sink(e.to)) {
          sink = e.to;
          break;
        }
        queue.push_back(e.to);
      }
      if (sink) break;
      for (EdgeId eid : g.in_edges(u)) {
        const Edge& e = g.edge(eid);
        if (!allowed(e) || flow[eid] == 0) continue;
        if (!visited.insert(e.from).second) continue;
        parent[e.from] = {eid, false};
        queue.push_back(e.from);
      }
    }
    if (!sink) break;
    // Flip flow along the augmenting path back to the source side.
    VertexId v = *sink;
    while (parent.count(v)) {
      auto [eid, forward] = parent.at(v);
      const Edge& e = g.edge(eid);
      flow[eid] = forward ? 1 : 0;
      v = forward ? e.from : e.to;
    }
    ++result.count;
  }
  for (const auto& [eid, f] : flow)
    if (f == 1) result.edges.insert(eid);
  return result;
}

}  // namespace

bool merge_close_areas(const RoadGraph& g, std::vector<Area>& areas,
                       const NodeClassification& cls,
                       const PipelineConfig& cfg) {
  bool changed = false;
  for (Area& p : areas) {
    for (Area& q : areas) {
      if (p.id == q.id) continue;
      if (geom::distance(p.polygon, q.polygon) >= cfg.area_merge_distance)
        continue;
      DirectPaths paths = direct_paths(g, cls, p.id, q.id);
      if (paths.count < 2) continue;
      geom::MultiPolygon corridors;
      for (EdgeId eid : paths.edges)
        corridors.push_back(geom::buffer_polyline(
            g.edge(eid).polyline, cfg.path_buffer, cfg.arc_segments));
      const bool grew_p = grow_area(p, corridors);
      const bool grew_q = grow_area(q, std::move(corridors));
      changed = changed || grew_p || grew_q;
    }
  }
  return changed;
}

void normalize_areas(std::vector<Area>& areas, const PipelineConfig& cfg) {
  geom::MultiPolygon shapes;
  shapes.reserve(areas.size());
  for (Area& a : areas) shapes.push_back(std::move(a.polygon));
  geom::MultiPolygon merged = geom::union_all(shapes);
  merged = geom::fill_holes(merged);
  merged = geom::close_components(merged, cfg.area_erode, cfg.area_erode,
                                  cfg.arc_segments);
  // Closing can mint a hole (a C-shape whose mouth shuts) and filling can
  // swallow a component that sat inside another's hole; resolve both so
  // areas stay hole-free and interior-disjoint.
  merged = geom::fill_holes(merged);
  merged = geom::union_all(merged);
  areas = areas_from_shapes(std::move(merged));
}

MarkedMap mark_areas(const RoadGraph& g, const PipelineConfig& cfg) {
  MarkedMap m;
  m.graph = g;
  m.areas = initial_areas(place_markers(m.graph, cfg), cfg);
  if (m.areas.empty()) return m;

  int round = 0;
  while (true) {
    if (round >= cfg.round_cap) {
      m.rounds = round;
      classify_nodes(m.graph, m.areas);
      throw NonConvergence("area refinement did not settle within " +
                               std::to_string(cfg.round_cap) + " rounds",
                           std::move(m));
    }
    ++round;

    NodeClassification cls = classify_nodes(m.graph, m.areas);
    for (const Area& area : m.areas)
      prune_internal_paths(m.graph, area, cls, cfg);
    cls = classify_nodes(m.graph, m.areas);

    bool absorbed = false;
    for (Area& area : m.areas) {
      const bool grew = absorb_internal_edges(m.graph, area, cls, cfg);
      absorbed = absorbed || grew;
    }
    const bool returned = absorb_return_paths(m.graph, m.areas, cls, cfg);
    const bool merged = merge_close_areas(m.graph, m.areas, cls, cfg);
    normalize_areas(m.areas, cfg);

    if (!absorbed && !returned && !merged) {
      m.rounds = round;
      break;
    }
  }

  // Settle bookkeeping against the final polygons: one more prune (the last
  // normalization may have nudged coverage) and a fresh classification.
  NodeClassification cls = classify_nodes(m.graph, m.areas);
  for (const Area& area : m.areas)
    prune_internal_paths(m.graph, area, cls, cfg);
  classify_nodes(m.graph, m.areas);

  for (VertexId vid : m.graph.vertex_ids()) {
    const auto [in_deg, out_deg] = m.graph.degrees(vid);
    if (in_deg <= 1 && out_deg <= 1) continue;
    const Point pos = m.graph.vertex(vid).position;
    const bool interior =
        std::any_of(m.areas.begin(), m.areas.end(), [&](const Area& a) {
          return geom::interior_contains(a.polygon, pos);
        });
    if (!interior)
      throw InvariantViolation("intersection vertex " + std::to_string(vid) +
                               " is not interior to any area");
  }
  return m;
}

}  // namespace haulmap
