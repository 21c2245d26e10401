#pragma once

#include <cstdint>
#include <vector>

#include "haulmap/config.hpp"
#include "haulmap/road_graph.hpp"
#include "haulmap/trace.hpp"

namespace haulmap {

// Incremental cluster of trip points sharing a location and a direction.
struct Cluster {
  std::int64_t id = 0;
  Point centroid;       // arithmetic mean of member positions
  double heading = 0.0; // circular mean of member headings, [0, 2*pi)
  int count = 0;
};

struct ClusterResult {
  std::vector<Cluster> clusters;  // ascending id; id doubles as vertex id
  // Per trip, per point: the cluster that point joined.
  std::vector<std::vector<std::int64_t>> assignments;
};

// Online assignment in trip order, then point order. A point joins the
// nearest cluster whose centroid lies within seed_radius and whose mean
// heading differs by less than heading_tolerance; otherwise it seeds a new
// cluster. Distance ties pick the lowest cluster id.
ClusterResult cluster_points(const std::vector<Trip>& trips,
                             const PipelineConfig& cfg);

// One vertex per cluster; consecutive distinct assignments within a trip
// become directed edges, repeated traversals accumulating support.
RoadGraph build_edges(const ClusterResult& result);

// Removes shortcut edges (a,c) where hops (a,b) and (b,c) exist and b lies
// within corridor of segment a-c, folding the removed support into both hops.
// Candidates are visited in ascending edge id and passes repeat until one
// makes no change. Returns the number of edges removed.
int sparsify(RoadGraph& g, double corridor);

// Drops edges with support below min_support, then isolated vertices.
// Returns the number of edges removed.
int prune_low_support(RoadGraph& g, int min_support);

// cluster_points -> build_edges -> sparsify -> prune_low_support.
RoadGraph infer_graph(const std::vector<Trip>& trips,
                      const PipelineConfig& cfg);

}  // namespace haulmap
