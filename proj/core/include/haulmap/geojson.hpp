#pragma once

#include <iosfwd>
#include <string>

#include "haulmap/area_marking.hpp"
#include "haulmap/road_graph.hpp"

#include "json.hpp"

namespace haulmap {

// A graph serializes to one FeatureCollection: Point features (vertices, by
// ascending id, properties {id}) followed by LineString features (edges, by
// ascending id, properties {id, from, to, support}). Equal graphs produce
// byte-identical text.
nlohmann::ordered_json graph_to_geojson(const RoadGraph& graph);

// Inverse of graph_to_geojson. Anything structurally off -- wrong geometry
// types, missing properties, dangling endpoint references -- is a ParseError.
RoadGraph graph_from_geojson(const nlohmann::ordered_json& doc);

// Graph features as above, then Polygon features (areas, by ascending id,
// properties {id, entry_nodes, exit_nodes}). The collection carries the
// refinement round count as a top-level "rounds_to_converge" member.
nlohmann::ordered_json marked_map_to_geojson(const MarkedMap& map);

// dump(2) plus trailing newline, the on-disk form used by the tools.
std::string to_text(const nlohmann::ordered_json& doc);

// Parses stream contents as JSON; malformed input is a ParseError.
nlohmann::ordered_json parse_json(std::istream& in, const std::string& source);

}  // namespace haulmap
