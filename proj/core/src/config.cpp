#include "haulmap/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "haulmap/errors.hpp"

namespace haulmap {

namespace {

struct Field {
  std::function<void(PipelineConfig&, double)> set;
  std::function<double(const PipelineConfig&)> get;
  bool integral = false;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"stop_speed",
       {[](PipelineConfig& c, double v) { c.stop_speed = v; },
        [](const PipelineConfig& c) { return c.stop_speed; }}},
      {"gap_threshold",
       {[](PipelineConfig& c, double v) { c.gap_threshold = v; },
        [](const PipelineConfig& c) { return c.gap_threshold; }}},
      {"min_points",
       {[](PipelineConfig& c, double v) { c.min_points = static_cast<int>(v); },
        [](const PipelineConfig& c) { return double(c.min_points); },
        true}},
      {"min_length",
       {[](PipelineConfig& c, double v) { c.min_length = v; },
        [](const PipelineConfig& c) { return c.min_length; }}},
      {"seed_radius",
       {[](PipelineConfig& c, double v) { c.seed_radius = v; },
        [](const PipelineConfig& c) { return c.seed_radius; }}},
      {"heading_tolerance",
       {[](PipelineConfig& c, double v) { c.heading_tolerance = v; },
        [](const PipelineConfig& c) { return c.heading_tolerance; }}},
      {"marker_radius",
       {[](PipelineConfig& c, double v) { c.marker_radius = v; },
        [](const PipelineConfig& c) { return c.marker_radius; }}},
      {"marker_angle",
       {[](PipelineConfig& c, double v) { c.marker_angle = v; },
        [](const PipelineConfig& c) { return c.marker_angle; }}},
      {"arc_segments",
       {[](PipelineConfig& c, double v) { c.arc_segments = static_cast<int>(v); },
        [](const PipelineConfig& c) { return double(c.arc_segments); },
        true}},
      {"area_dilate",
       {[](PipelineConfig& c, double v) { c.area_dilate = v; },
        [](const PipelineConfig& c) { return c.area_dilate; }}},
      {"area_erode",
       {[](PipelineConfig& c, double v) { c.area_erode = v; },
        [](const PipelineConfig& c) { return c.area_erode; }}},
      {"path_buffer",
       {[](PipelineConfig& c, double v) { c.path_buffer = v; },
        [](const PipelineConfig& c) { return c.path_buffer; }}},
      {"area_merge_distance",
       {[](PipelineConfig& c, double v) { c.area_merge_distance = v; },
        [](const PipelineConfig& c) { return c.area_merge_distance; }}},
      {"opposite_lane_distance",
       {[](PipelineConfig& c, double v) { c.opposite_lane_distance = v; },
        [](const PipelineConfig& c) { return c.opposite_lane_distance; }}},
      {"opposite_lane_angle",
       {[](PipelineConfig& c, double v) { c.opposite_lane_angle = v; },
        [](const PipelineConfig& c) { return c.opposite_lane_angle; }}},
      {"round_cap",
       {[](PipelineConfig& c, double v) { c.round_cap = static_cast<int>(v); },
        [](const PipelineConfig& c) { return double(c.round_cap); },
        true}},
      {"sparsify_corridor",
       {[](PipelineConfig& c, double v) { c.sparsify_corridor = v; },
        [](const PipelineConfig& c) { return c.sparsify_corridor; }}},
      {"min_edge_support",
       {[](PipelineConfig& c, double v) {
          c.min_edge_support = static_cast<int>(v);
        },
        [](const PipelineConfig& c) { return double(c.min_edge_support); },
        true}},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvariantViolation("config: " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(std::isfinite(stop_speed) && stop_speed >= 0.0, "stop_speed must be >= 0");
  require(gap_threshold > 0.0, "gap_threshold must be > 0");
  require(min_points >= 1, "min_points must be >= 1");
  require(min_length > 0.0, "min_length must be > 0");
  require(seed_radius > 0.0, "seed_radius must be > 0");
  require(heading_tolerance > 0.0 && heading_tolerance <= geom::pi,
          "heading_tolerance must be in (0, pi]");
  require(marker_radius > 0.0, "marker_radius must be > 0");
  require(marker_angle > 0.0 && marker_angle <= geom::pi,
          "marker_angle must be in (0, pi]");
  require(arc_segments >= 2, "arc_segments must be >= 2");
  require(area_dilate > 0.0, "area_dilate must be > 0");
  require(area_erode > 0.0, "area_erode must be > 0");
  require(area_dilate > area_erode, "area_dilate must exceed area_erode");
  require(path_buffer > 0.0, "path_buffer must be > 0");
  require(area_merge_distance > 0.0, "area_merge_distance must be > 0");
  require(opposite_lane_distance >= 0.0, "opposite_lane_distance must be >= 0");
  require(opposite_lane_angle >= 0.0 && opposite_lane_angle <= geom::pi,
          "opposite_lane_angle must be in [0, pi]");
  require(round_cap >= 1, "round_cap must be >= 1");
  require(sparsify_corridor > 0.0, "sparsify_corridor must be > 0");
  require(min_edge_support >= 0, "min_edge_support must be >= 0");
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ParseError("unknown config key '" + key + "'");
  double parsed = 0.0;
  std::size_t consumed = 0;
  try {
    parsed = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': not a number: '" + value + "'");
  }
  if (consumed != value.size())
    throw ParseError("config key '" + key + "': trailing garbage in '" + value + "'");
  if (it->second.integral && parsed != std::floor(parsed))
    throw ParseError("config key '" + key + "' takes an integer");
  it->second.set(cfg, parsed);
}

PipelineConfig load_config(std::istream& in) {
  PipelineConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", line_no);
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()), line_no);
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  return load_config(in);
}

std::string config_to_string(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [name, field] : fields()) {
    if (field.integral)
      out << name << " = " << static_cast<long long>(field.get(cfg)) << "\n";
    else
      out << name << " = " << field.get(cfg) << "\n";
  }
  return out.str();
}

}  // namespace haulmap
