#include "haulmap/geojson.hpp"

#include <istream>
#include <utility>

#include "haulmap/errors.hpp"

namespace haulmap {

using nlohmann::ordered_json;

namespace {

ordered_json coordinates(const Polyline& line) {
  ordered_json coords = ordered_json::array();
  for (const Point& p : line) {
    coords.push_back(ordered_json::array({p.x, p.y}));
  }
  return coords;
}

ordered_json feature(const char* geometry_type, ordered_json coords,
                     ordered_json properties) {
  ordered_json f;
  f["type"] = "Feature";
  f["geometry"]["type"] = geometry_type;
  f["geometry"]["coordinates"] = std::move(coords);
  f["properties"] = std::move(properties);
  return f;
}

void append_graph_features(const RoadGraph& graph, ordered_json& features) {
  for (VertexId id : graph.vertex_ids()) {
    const Vertex& v = graph.vertex(id);
    ordered_json props;
    props["id"] = v.id;
    features.push_back(feature(
        "Point", ordered_json::array({v.position.x, v.position.y}),
        std::move(props)));
  }
  for (EdgeId id : graph.edge_ids()) {
    const Edge& e = graph.edge(id);
    ordered_json props;
    props["id"] = e.id;
    props["from"] = e.from;
    props["to"] = e.to;
    props["support"] = e.support;
    features.push_back(
        feature("LineString", coordinates(e.polyline), std::move(props)));
  }
}

const ordered_json& require(const ordered_json& obj, const char* key,
                            const char* what) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string(what) + " is missing '" + key + "'");
  }
  return *it;
}

double number_at(const ordered_json& value, const char* what) {
  if (!value.is_number()) {
    throw ParseError(std::string(what) + " must be a number");
  }
  return value.get<double>();
}

std::int64_t integer_at(const ordered_json& value, const char* what) {
  if (!value.is_number_integer()) {
    throw ParseError(std::string(what) + " must be an integer");
  }
  return value.get<std::int64_t>();
}

Point point_at(const ordered_json& coords, const char* what) {
  if (!coords.is_array() || coords.size() != 2) {
    throw ParseError(std::string(what) + " must be an [x, y] pair");
  }
  return {number_at(coords[0], what), number_at(coords[1], what)};
}

}  // namespace

ordered_json graph_to_geojson(const RoadGraph& graph) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = ordered_json::array();
  append_graph_features(graph, doc["features"]);
  return doc;
}

RoadGraph graph_from_geojson(const ordered_json& doc) {
  if (!doc.is_object() ||
      require(doc, "type", "document").get<std::string>() !=
          "FeatureCollection") {
    throw ParseError("document is not a FeatureCollection");
  }
  const ordered_json& features = require(doc, "features", "document");
  if (!features.is_array()) {
    throw ParseError("document 'features' must be an array");
  }

  RoadGraph graph;
  try {
    for (const ordered_json& f : features) {
      const ordered_json& geometry = require(f, "geometry", "feature");
      const ordered_json& props = require(f, "properties", "feature");
      const std::string type =
          require(geometry, "type", "geometry").get<std::string>();
      const ordered_json& coords =
          require(geometry, "coordinates", "geometry");
      if (type == "Point") {
        graph.add_vertex_with_id(integer_at(require(props, "id", "vertex"),
                                            "vertex id"),
                                 point_at(coords, "vertex coordinates"));
      } else if (type == "LineString") {
        if (!coords.is_array() || coords.size() < 2) {
          throw ParseError("edge needs at least two coordinates");
        }
        Polyline line;
        for (const ordered_json& c : coords) {
          line.push_back(point_at(c, "edge coordinate"));
        }
        const auto support =
            integer_at(require(props, "support", "edge"), "edge support");
        graph.add_edge_with_id(
            integer_at(require(props, "id", "edge"), "edge id"),
            integer_at(require(props, "from", "edge"), "edge from"),
            integer_at(require(props, "to", "edge"), "edge to"),
            std::move(line), static_cast<int>(support));
      } else {
        throw ParseError("unsupported geometry type '" + type + "'");
      }
    }
  } catch (const InvariantViolation& e) {
    // Structurally broken references (unknown endpoints, duplicate ids, ...)
    // are input defects here, not programming errors.
    throw ParseError(e.what());
  }
  return graph;
}

ordered_json marked_map_to_geojson(const MarkedMap& map) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["rounds_to_converge"] = map.rounds;
  doc["features"] = ordered_json::array();
  append_graph_features(map.graph, doc["features"]);
  for (const Area& area : map.areas) {
    ordered_json rings = ordered_json::array();
    rings.push_back(coordinates(area.polygon.exterior));
    for (const auto& hole : area.polygon.holes) {
      rings.push_back(coordinates(hole));
    }
    ordered_json props;
    props["id"] = area.id;
    props["entry_nodes"] = area.entry_nodes;
    props["exit_nodes"] = area.exit_nodes;
    doc["features"].push_back(
        feature("Polygon", std::move(rings), std::move(props)));
  }
  return doc;
}

std::string to_text(const ordered_json& doc) { return doc.dump(2) + "\n"; }

ordered_json parse_json(std::istream& in, const std::string& source) {
  try {
    return ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

}  // namespace haulmap
