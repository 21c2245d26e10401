#include "haulmap/map_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>

#include "haulmap/errors.hpp"

namespace haulmap {

namespace {

// Grid spatial index over cluster centroids, cell size = seed_radius, so any
// cluster within seed_radius of a point sits in the 3x3 cell neighbourhood.
class ClusterIndex {
 public:
  explicit ClusterIndex(double cell) : cell_(cell) {}

  void insert(std::size_t idx, Point p) {
    cells_[key(p)].push_back(idx);
    where_[idx] = key(p);
  }

  void update(std::size_t idx, Point p) {
    auto k = key(p);
    auto& old = where_[idx];
    if (k == old) return;
    auto& bucket = cells_[old];
    bucket.erase(std::remove(bucket.begin(), bucket.end(), idx), bucket.end());
    cells_[k].push_back(idx);
    old = k;
  }

  template <typename Fn>
  void for_neighbourhood(Point p, Fn&& fn) const {
    auto [cx, cy] = key(p);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find({cx + dx, cy + dy});
        if (it == cells_.end()) continue;
        for (std::size_t idx : it->second) fn(idx);
      }
    }
  }

 private:
  std::pair<long, long> key(Point p) const {
    return {static_cast<long>(std::floor(p.x / cell_)),
            static_cast<long>(std::floor(p.y / cell_))};
  }

  double cell_;
  std::map<std::pair<long, long>, std::vector<std::size_t>> cells_;
  std::map<std::size_t, std::pair<long, long>> where_;
};

struct HeadingSum {
  double x = 0.0;
  double y = 0.0;
};

}  // namespace

ClusterResult cluster_points(const std::vector<Trip>& trips,
                             const PipelineConfig& cfg) {
  ClusterResult result;
  result.assignments.reserve(trips.size());
  std::vector<HeadingSum> sums;
  ClusterIndex index(cfg.seed_radius);

  for (const Trip& trip : trips) {
    std::vector<std::int64_t>& assigned = result.assignments.emplace_back();
    assigned.reserve(trip.points.size());
    for (const GpsPoint& gp : trip.points) {
      if (!gp.heading) {
        throw InvariantViolation("trip " + trip.trip_id +
                                 " has a point without derived heading");
      }
      const double heading = *gp.heading;
      std::size_t best = result.clusters.size();
      double best_dist = std::numeric_limits<double>::infinity();
      index.for_neighbourhood(gp.position, [&](std::size_t idx) {
        const Cluster& c = result.clusters[idx];
        double d = geom::distance(gp.position, c.centroid);
        if (d > cfg.seed_radius) return;
        if (geom::circular_diff(heading, c.heading) >= cfg.heading_tolerance)
          return;
        if (d < best_dist || (d == best_dist && idx < best)) {
          best_dist = d;
          best = idx;
        }
      });

      if (best == result.clusters.size()) {
        Cluster c;
        c.id = static_cast<std::int64_t>(result.clusters.size());
        c.centroid = gp.position;
        c.heading = heading;
        c.count = 1;
        result.clusters.push_back(c);
        sums.push_back({std::cos(heading), std::sin(heading)});
        index.insert(static_cast<std::size_t>(c.id), c.centroid);
        assigned.push_back(c.id);
      } else {
        Cluster& c = result.clusters[best];
        c.count += 1;
        c.centroid.x += (gp.position.x - c.centroid.x) / c.count;
        c.centroid.y += (gp.position.y - c.centroid.y) / c.count;
        sums[best].x += std::cos(heading);
        sums[best].y += std::sin(heading);
        c.heading = geom::normalize_angle(std::atan2(sums[best].y, sums[best].x));
        index.update(best, c.centroid);
        assigned.push_back(c.id);
      }
    }
  }
  return result;
}

RoadGraph build_edges(const ClusterResult& result) {
  RoadGraph g;
  for (const Cluster& c : result.clusters) g.add_vertex_with_id(c.id, c.centroid);
  for (const auto& trip : result.assignments) {
    std::int64_t prev = -1;
    for (std::int64_t cid : trip) {
      if (prev >= 0 && cid != prev) {
        g.add_edge(prev, cid,
                   {g.vertex(prev).position, g.vertex(cid).position});
      }
      prev = cid;
    }
  }
  return g;
}

int sparsify(RoadGraph& g, double corridor) {
  int removed_total = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (EdgeId eid : g.edge_ids()) {
      if (!g.has_edge(eid)) continue;
      const Edge e = g.edge(eid);
      // Candidate midpoints b in ascending vertex id: out-neighbours of
      // e.from that also reach e.to.
      std::optional<VertexId> via;
      for (EdgeId hop1 : g.out_edges(e.from)) {
        VertexId b = g.edge(hop1).to;
        if (b == e.to) continue;
        if (!g.find_edge(b, e.to)) continue;
        if (geom::point_segment_distance(g.vertex(b).position,
                                         e.polyline.front(),
                                         e.polyline.back()) > corridor)
          continue;
        if (!via || b < *via) via = b;
      }
      if (!via) continue;
      g.add_support(*g.find_edge(e.from, *via), e.support);
      g.add_support(*g.find_edge(*via, e.to), e.support);
      g.remove_edge(eid);
      ++removed_total;
      changed = true;
    }
  }
  return removed_total;
}

int prune_low_support(RoadGraph& g, int min_support) {
  int removed = 0;
  for (EdgeId eid : g.edge_ids()) {
    if (g.edge(eid).support < min_support) {
      g.remove_edge(eid);
      ++removed;
    }
  }
  for (VertexId vid : g.vertex_ids()) {
    auto [in, out] = g.degrees(vid);
    if (in == 0 && out == 0) g.remove_vertex(vid);
  }
  return removed;
}

RoadGraph infer_graph(const std::vector<Trip>& trips,
                      const PipelineConfig& cfg) {
  ClusterResult clusters = cluster_points(trips, cfg);
  RoadGraph g = build_edges(clusters);
  sparsify(g, cfg.sparsify_corridor);
  prune_low_support(g, cfg.min_edge_support);
  return g;
}

}  // namespace haulmap
