#include "haulmap/road_graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "haulmap/errors.hpp"

namespace haulmap {

namespace {

constexpr double kEndpointTolerance = 1e-6;

void insert_sorted(std::vector<EdgeId>& ids, EdgeId id) {
  ids.insert(std::lower_bound(ids.begin(), ids.end(), id), id);
}

void erase_value(std::vector<EdgeId>& ids, EdgeId id) {
  ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
}

}  // namespace

double Edge::initial_heading() const {
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    if (geom::distance(polyline[0], polyline[i]) > 0.0)
      return geom::heading_of(polyline[0], polyline[i]);
  }
  return 0.0;
}

double Edge::final_heading() const {
  const std::size_t n = polyline.size();
  for (std::size_t i = n - 1; i > 0; --i) {
    if (geom::distance(polyline[i - 1], polyline[n - 1]) > 0.0)
      return geom::heading_of(polyline[i - 1], polyline[n - 1]);
  }
  return 0.0;
}

VertexId RoadGraph::add_vertex(Point position) {
  return add_vertex_with_id(next_vertex_id_, position);
}

VertexId RoadGraph::add_vertex_with_id(VertexId id, Point position) {
  if (vertices_.count(id))
    throw InvariantViolation("duplicate vertex id " + std::to_string(id));
  vertices_[id] = Vertex{id, position};
  out_[id];
  in_[id];
  next_vertex_id_ = std::max(next_vertex_id_, id + 1);
  return id;
}

EdgeId RoadGraph::add_edge(VertexId from, VertexId to, Polyline polyline,
                           int support) {
  auto existing = by_endpoints_.find({from, to});
  if (existing != by_endpoints_.end()) {
    add_support(existing->second, support);
    return existing->second;
  }
  return add_edge_with_id(next_edge_id_, from, to, std::move(polyline), support);
}

EdgeId RoadGraph::add_edge_with_id(EdgeId id, VertexId from, VertexId to,
                                   Polyline polyline, int support) {
  if (edges_.count(id))
    throw InvariantViolation("duplicate edge id " + std::to_string(id));
  if (from == to)
    throw InvariantViolation("self-loop edge at vertex " + std::to_string(from));
  if (by_endpoints_.count({from, to}))
    throw InvariantViolation("parallel edge " + std::to_string(from) + "->" +
                             std::to_string(to));
  if (!has_vertex(from) || !has_vertex(to))
    throw InvariantViolation("edge references unknown vertex");
  if (polyline.size() < 2)
    throw InvariantViolation("edge polyline needs at least two points");
  if (support < 1) throw InvariantViolation("edge support must be positive");
  if (geom::distance(polyline.front(), vertices_.at(from).position) >
          kEndpointTolerance ||
      geom::distance(polyline.back(), vertices_.at(to).position) >
          kEndpointTolerance)
    throw InvariantViolation("edge polyline does not join its endpoints");

  Edge e;
  e.id = id;
  e.from = from;
  e.to = to;
  e.polyline = std::move(polyline);
  e.support = support;
  e.length = geom::length(e.polyline);
  edges_[id] = std::move(e);
  insert_sorted(out_[from], id);
  insert_sorted(in_[to], id);
  by_endpoints_[{from, to}] = id;
  next_edge_id_ = std::max(next_edge_id_, id + 1);
  return id;
}

void RoadGraph::add_support(EdgeId id, int amount) {
  auto it = edges_.find(id);
  if (it == edges_.end())
    throw InvariantViolation("unknown edge " + std::to_string(id));
  it->second.support += amount;
}

void RoadGraph::remove_edge(EdgeId id) {
  auto it = edges_.find(id);
  if (it == edges_.end())
    throw InvariantViolation("unknown edge " + std::to_string(id));
  const Edge& e = it->second;
  erase_value(out_[e.from], id);
  erase_value(in_[e.to], id);
  by_endpoints_.erase({e.from, e.to});
  edges_.erase(it);
}

void RoadGraph::remove_vertex(VertexId id) {
  if (!has_vertex(id))
    throw InvariantViolation("unknown vertex " + std::to_string(id));
  if (!out_.at(id).empty() || !in_.at(id).empty())
    throw InvariantViolation("cannot remove connected vertex " +
                             std::to_string(id));
  out_.erase(id);
  in_.erase(id);
  vertices_.erase(id);
}

bool RoadGraph::has_vertex(VertexId id) const { return vertices_.count(id) > 0; }
bool RoadGraph::has_edge(EdgeId id) const { return edges_.count(id) > 0; }

const Vertex& RoadGraph::vertex(VertexId id) const {
  auto it = vertices_.find(id);
  if (it == vertices_.end())
    throw InvariantViolation("unknown vertex " + std::to_string(id));
  return it->second;
}

const Edge& RoadGraph::edge(EdgeId id) const {
  auto it = edges_.find(id);
  if (it == edges_.end())
    throw InvariantViolation("unknown edge " + std::to_string(id));
  return it->second;
}

std::optional<EdgeId> RoadGraph::find_edge(VertexId from, VertexId to) const {
  auto it = by_endpoints_.find({from, to});
  if (it == by_endpoints_.end()) return std::nullopt;
  return it->second;
}

std::pair<int, int> RoadGraph::degrees(VertexId id) const {
  if (!has_vertex(id))
    throw InvariantViolation("unknown vertex " + std::to_string(id));
  return {static_cast<int>(in_.at(id).size()),
          static_cast<int>(out_.at(id).size())};
}

const std::vector<EdgeId>& RoadGraph::out_edges(VertexId id) const {
  auto it = out_.find(id);
  if (it == out_.end())
    throw InvariantViolation("unknown vertex " + std::to_string(id));
  return it->second;
}

const std::vector<EdgeId>& RoadGraph::in_edges(VertexId id) const {
  auto it = in_.find(id);
  if (it == in_.end())
    throw InvariantViolation("unknown vertex " + std::to_string(id));
  return it->second;
}

std::vector<VertexId> RoadGraph::vertex_ids() const {
  std::vector<VertexId> ids;
  ids.reserve(vertices_.size());
  for (const auto& [id, v] : vertices_) ids.push_back(id);
  return ids;
}

std::vector<EdgeId> RoadGraph::edge_ids() const {
  std::vector<EdgeId> ids;
  ids.reserve(edges_.size());
  for (const auto& [id, e] : edges_) ids.push_back(id);
  return ids;
}

double RoadGraph::total_length() const {
  double sum = 0.0;
  for (const auto& [id, e] : edges_) sum += e.length;
  return sum;
}

std::optional<RoadGraph::Path> RoadGraph::shortest_path(
    VertexId src, VertexId dst,
    const std::function<bool(const Edge&)>& edge_filter) const {
  if (!has_vertex(src) || !has_vertex(dst))
    throw InvariantViolation("shortest_path endpoint is not a vertex");
  if (src == dst) return Path{};

  struct Label {
    double dist = 0.0;
    std::vector<EdgeId> path;
  };
  // Strict weak order: shorter wins, then lexicographically smaller edge ids.
  auto better = [](const Label& a, const Label& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.path < b.path;
  };

  std::map<VertexId, Label> labels;
  labels[src] = Label{};
  using QueueItem = std::pair<double, VertexId>;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
  queue.push({0.0, src});

  while (!queue.empty()) {
    auto [dist, u] = queue.top();
    queue.pop();
    auto lu = labels.find(u);
    if (lu == labels.end() || dist > lu->second.dist) continue;
    for (EdgeId eid : out_.at(u)) {
      const Edge& e = edges_.at(eid);
      if (edge_filter && !edge_filter(e)) continue;
      Label candidate;
      candidate.dist = lu->second.dist + e.length;
      candidate.path = lu->second.path;
      candidate.path.push_back(eid);
      auto lv = labels.find(e.to);
      if (lv == labels.end() || better(candidate, lv->second)) {
        labels[e.to] = std::move(candidate);
        queue.push({labels[e.to].dist, e.to});
      }
    }
  }

  auto it = labels.find(dst);
  if (it == labels.end()) return std::nullopt;
  return Path{it->second.path, it->second.dist};
}

double edge_length(const Edge& e) { return e.length; }

double graph_total_length(const RoadGraph& g) { return g.total_length(); }

}  // namespace haulmap
