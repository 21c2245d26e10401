#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "haulmap/geometry.hpp"

namespace haulmap {

using VertexId = std::int64_t;
using EdgeId = std::int64_t;

struct Vertex {
  VertexId id = 0;
  Point position;
};

// Directed edge with geometry. The polyline starts at the from-vertex position
// and ends at the to-vertex position; support counts traversals.
struct Edge {
  EdgeId id = 0;
  VertexId from = 0;
  VertexId to = 0;
  Polyline polyline;
  int support = 1;
  double length = 0.0;  // polyline arc length, cached

  // Travel direction leaving the from-vertex / arriving at the to-vertex.
  double initial_heading() const;
  double final_heading() const;
};

// Directed geometric graph. At most one edge exists per ordered vertex pair;
// re-adding an edge accumulates support. Iteration orders are ascending by id
// so identical build sequences give identical exports.
class RoadGraph {
 public:
  VertexId add_vertex(Point position);
  VertexId add_vertex_with_id(VertexId id, Point position);

  // Requires from != to (self-loops are degenerate here) and existing
  // endpoints whose positions match the polyline ends.
  EdgeId add_edge(VertexId from, VertexId to, Polyline polyline, int support = 1);
  EdgeId add_edge_with_id(EdgeId id, VertexId from, VertexId to,
                          Polyline polyline, int support);

  void add_support(EdgeId id, int amount);
  void remove_edge(EdgeId id);
  void remove_vertex(VertexId id);  // vertex must be isolated

  bool has_vertex(VertexId id) const;
  bool has_edge(EdgeId id) const;
  const Vertex& vertex(VertexId id) const;
  const Edge& edge(EdgeId id) const;
  std::optional<EdgeId> find_edge(VertexId from, VertexId to) const;

  // (in_degree, out_degree)
  std::pair<int, int> degrees(VertexId id) const;
  const std::vector<EdgeId>& out_edges(VertexId id) const;
  const std::vector<EdgeId>& in_edges(VertexId id) const;

  std::vector<VertexId> vertex_ids() const;
  std::vector<EdgeId> edge_ids() const;
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  double total_length() const;

  struct Path {
    std::vector<EdgeId> edges;
    double length = 0.0;
  };

  // Minimum arc-length path over edges passing the filter. Equal-length routes
  // tie-break on the lexicographically smallest edge-id sequence. src == dst
  // yields an empty path of length 0; nullopt when dst is unreachable.
  std::optional<Path> shortest_path(
      VertexId src, VertexId dst,
      const std::function<bool(const Edge&)>& edge_filter = {}) const;

 private:
  std::map<VertexId, Vertex> vertices_;
  std::map<EdgeId, Edge> edges_;
  std::map<VertexId, std::vector<EdgeId>> out_;
  std::map<VertexId, std::vector<EdgeId>> in_;
  std::map<std::pair<VertexId, VertexId>, EdgeId> by_endpoints_;
  VertexId next_vertex_id_ = 0;
  EdgeId next_edge_id_ = 0;
};

double edge_length(const Edge& e);
double graph_total_length(const RoadGraph& g);

}  // namespace haulmap
