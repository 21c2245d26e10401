#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "haulmap/config.hpp"
#include "haulmap/geometry.hpp"

namespace haulmap {

struct GpsPoint {
  std::string truck_id;
  double timestamp = 0.0;  // seconds since epoch
  Point position;          // planar metres
  std::optional<double> speed;    // m/s, derived
  std::optional<double> heading;  // radians in [0, 2*pi), derived
};

// One truck's time-ordered log. Timestamps are strictly increasing.
struct RawTrace {
  std::string truck_id;
  std::vector<GpsPoint> points;
};

// A maximal stretch of continuous movement: no stop, no data gap, enough
// points and enough distance. Points carry speed and heading.
struct Trip {
  std::string trip_id;
  std::vector<GpsPoint> points;

  Polyline positions() const;
  double length() const;
};

struct LoadOptions {
  // Input columns x,y are lon,lat degrees; project to local planar metres
  // (equirectangular about the dataset centroid).
  bool latlon = false;
};

struct LoadResult {
  std::vector<RawTrace> traces;        // ordered by truck_id
  std::size_t duplicates_dropped = 0;  // rows sharing a truck's timestamp
};

// Reads "truck_id,timestamp,x,y" CSV. Rows may arrive in any order; each
// truck's points come back sorted by timestamp with duplicate timestamps
// collapsed to the first occurrence. Malformed rows raise ParseError with the
// offending line number. Empty input yields an empty list.
LoadResult load_points(std::istream& in, const LoadOptions& options = {});

// Populates speed and heading by forward difference; the last point copies its
// predecessor. A single-point trace gets speed 0 and heading 0.
RawTrace derive_kinematics(RawTrace trace);

// Splits a trace at stopped points (dropped) and at data gaps, then keeps runs
// with at least cfg.min_points points and cfg.min_length metres of movement.
std::vector<Trip> segment_trips(const RawTrace& trace,
                                const PipelineConfig& cfg);

// derive_kinematics + segment_trips over every trace, with deterministic
// globally unique trip ids ("<truck_id>-<n>").
std::vector<Trip> segment_all(const std::vector<RawTrace>& traces,
                              const PipelineConfig& cfg);

// Trip storage: the input CSV schema plus a trailing trip_id column.
void write_trips_csv(std::ostream& out, const std::vector<Trip>& trips);
std::vector<Trip> read_trips_csv(std::istream& in);

}  // namespace haulmap
