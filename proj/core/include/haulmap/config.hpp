#pragma once

#include <iosfwd>
#include <string>

#include "haulmap/geometry.hpp"

namespace haulmap {

// Every numeric knob of the pipeline in one place. Distances are metres,
// angles radians, speeds metres per second, times seconds.
struct PipelineConfig {
  double stop_speed = 1.0 / 3.6;       // 1 kph: below this a truck counts as stopped
  double gap_threshold = 30.0;         // split a trace at data gaps longer than this
  int min_points = 11;                 // "more than 10 GPS points"
  double min_length = 100.0;           // minimum movement per trip
  double seed_radius = 30.0;           // cluster join radius
  double heading_tolerance = geom::pi / 4.0;   // 45 degrees
  double marker_radius = 30.0;         // sector radius at splits/merges/dead ends
  double marker_angle = 2.0 * geom::pi / 3.0;  // 120 degree opening
  int arc_segments = 16;               // chords per sector arc / per buffer quadrant
  double area_dilate = 11.0;           // initial closing, expansion step
  double area_erode = 10.0;            // initial closing, contraction step
  double path_buffer = 5.0;            // corridor half-width when absorbing paths
  double area_merge_distance = 30.0;   // bridge areas closer than this
  double opposite_lane_distance = 25.0;  // entry/exit pairs closer than this ...
  double opposite_lane_angle = geom::pi / 4.0;  // ... and antiparallel within this are skipped
  int round_cap = 20;                  // refinement rounds before giving up
  double sparsify_corridor = 15.0;     // shortcut removal corridor half-width
  int min_edge_support = 1;            // prune edges seen fewer times (1 = keep all)

  // Throws InvariantViolation when a value is out of range.
  void validate() const;
};

// Parses "key = value" lines ('#' starts a comment). Unknown keys are errors.
// Returns defaults updated with the file's assignments; the result is validated.
PipelineConfig load_config(std::istream& in);
PipelineConfig load_config_file(const std::string& path);

// Applies one "key = value" assignment (used for CLI overrides).
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

// The full key = value listing of a config, one parameter per line.
std::string config_to_string(const PipelineConfig& cfg);

}  // namespace haulmap
