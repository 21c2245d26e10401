#include "haulmap/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <istream>
#include <sstream>

#include "haulmap/errors.hpp"

namespace haulmap {

namespace {

constexpr double kEarthRadius = 6371000.0;  // metres
constexpr char kPointsHeader[] = "truck_id,timestamp,x,y";
constexpr char kTripsHeader[] = "truck_id,timestamp,x,y,trip_id";

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_number(const std::string& cell, const char* what,
                    std::size_t line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError(std::string("expected a number for ") + what + ", got '" +
                         cell + "'",
                     line_no);
  return value;
}

std::string format_number(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void project_latlon(std::vector<GpsPoint>& points) {
  if (points.empty()) return;
  double lon_sum = 0.0;
  double lat_sum = 0.0;
  for (const GpsPoint& p : points) {
    lon_sum += p.position.x;
    lat_sum += p.position.y;
  }
  const double lon0 = lon_sum / double(points.size());
  const double lat0 = lat_sum / double(points.size());
  const double deg = geom::pi / 180.0;
  const double cos_lat0 = std::cos(lat0 * deg);
  for (GpsPoint& p : points) {
    p.position = {kEarthRadius * cos_lat0 * (p.position.x - lon0) * deg,
                  kEarthRadius * (p.position.y - lat0) * deg};
  }
}

// Trip-local kinematics for points loaded from trip storage; identical rule to
// derive_kinematics but scoped to the trip's own points.
void derive_inplace(std::vector<GpsPoint>& points) {
  if (points.empty()) return;
  if (points.size() == 1) {
    points[0].speed = 0.0;
    points[0].heading = 0.0;
    return;
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double dt = points[i + 1].timestamp - points[i].timestamp;
    if (dt <= 0.0)
      throw InvariantViolation("trace: timestamps must be strictly increasing");
    points[i].speed =
        geom::distance(points[i].position, points[i + 1].position) / dt;
    points[i].heading = geom::heading_of(points[i].position, points[i + 1].position);
  }
  points.back().speed = points[points.size() - 2].speed;
  points.back().heading = points[points.size() - 2].heading;
}

}  // namespace

Polyline Trip::positions() const {
  Polyline line;
  line.reserve(points.size());
  for (const GpsPoint& p : points) line.push_back(p.position);
  return line;
}

double Trip::length() const { return geom::length(positions()); }

LoadResult load_points(std::istream& in, const LoadOptions& options) {
  LoadResult result;
  std::string line;
  if (!std::getline(in, line)) return result;  // empty input, not an error
  if (strip_cr(line) != kPointsHeader)
    throw ParseError(std::string("expected header '") + kPointsHeader + "'", 1);

  std::vector<GpsPoint> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4)
      throw ParseError("expected 4 columns, got " + std::to_string(cells.size()),
                       line_no);
    GpsPoint p;
    p.truck_id = cells[0];
    p.timestamp = parse_number(cells[1], "timestamp", line_no);
    p.position.x = parse_number(cells[2], "x", line_no);
    p.position.y = parse_number(cells[3], "y", line_no);
    rows.push_back(std::move(p));
  }

  if (options.latlon) project_latlon(rows);

  std::map<std::string, std::vector<GpsPoint>> by_truck;
  for (GpsPoint& p : rows) by_truck[p.truck_id].push_back(std::move(p));

  for (auto& [truck_id, points] : by_truck) {
    std::stable_sort(points.begin(), points.end(),
                     [](const GpsPoint& a, const GpsPoint& b) {
                       return a.timestamp < b.timestamp;
                     });
    RawTrace trace;
    trace.truck_id = truck_id;
    for (GpsPoint& p : points) {
      if (!trace.points.empty() &&
          p.timestamp == trace.points.back().timestamp) {
        ++result.duplicates_dropped;  // keep the first occurrence
        continue;
      }
      trace.points.push_back(std::move(p));
    }
    result.traces.push_back(std::move(trace));
  }
  return result;
}

RawTrace derive_kinematics(RawTrace trace) {
  derive_inplace(trace.points);
  return trace;
}

std::vector<Trip> segment_trips(const RawTrace& trace,
                                const PipelineConfig& cfg) {
  std::vector<std::vector<GpsPoint>> runs;
  std::vector<GpsPoint> current;
  const auto close_run = [&] {
    if (!current.empty()) runs.push_back(std::move(current));
    current.clear();
  };

  for (const GpsPoint& p : trace.points) {
    if (!p.speed || !p.heading)
      throw InvariantViolation("segment_trips: kinematics not populated");
    if (*p.speed < cfg.stop_speed) {
      // A stopped point ends the run and is itself discarded.
      close_run();
      continue;
    }
    if (!current.empty() &&
        p.timestamp - current.back().timestamp > cfg.gap_threshold) {
      close_run();
    }
    current.push_back(p);
  }
  close_run();

  std::vector<Trip> trips;
  std::size_t index = 0;
  for (auto& run : runs) {
    if (static_cast<int>(run.size()) < cfg.min_points) continue;
    Polyline line;
    line.reserve(run.size());
    for (const GpsPoint& p : run) line.push_back(p.position);
    if (geom::length(line) < cfg.min_length) continue;
    Trip trip;
    trip.trip_id = trace.truck_id + "-" + std::to_string(index++);
    trip.points = std::move(run);
    trips.push_back(std::move(trip));
  }
  return trips;
}

std::vector<Trip> segment_all(const std::vector<RawTrace>& traces,
                              const PipelineConfig& cfg) {
  std::vector<Trip> trips;
  for (const RawTrace& trace : traces) {
    auto trace_trips = segment_trips(derive_kinematics(trace), cfg);
    trips.insert(trips.end(), std::make_move_iterator(trace_trips.begin()),
                 std::make_move_iterator(trace_trips.end()));
  }
  return trips;
}

void write_trips_csv(std::ostream& out, const std::vector<Trip>& trips) {
  out << kTripsHeader << "\n";
  for (const Trip& trip : trips) {
    for (const GpsPoint& p : trip.points) {
      out << p.truck_id << ',' << format_number(p.timestamp) << ','
          << format_number(p.position.x) << ',' << format_number(p.position.y)
          << ',' << trip.trip_id << "\n";
    }
  }
}

std::vector<Trip> read_trips_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  if (strip_cr(line) != kTripsHeader)
    throw ParseError(std::string("expected header '") + kTripsHeader + "'", 1);

  std::vector<Trip> trips;
  std::map<std::string, std::size_t> index_of;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5)
      throw ParseError("expected 5 columns, got " + std::to_string(cells.size()),
                       line_no);
    GpsPoint p;
    p.truck_id = cells[0];
    p.timestamp = parse_number(cells[1], "timestamp", line_no);
    p.position.x = parse_number(cells[2], "x", line_no);
    p.position.y = parse_number(cells[3], "y", line_no);
    const std::string& trip_id = cells[4];
    auto [it, inserted] = index_of.try_emplace(trip_id, trips.size());
    if (inserted) {
      Trip trip;
      trip.trip_id = trip_id;
      trips.push_back(std::move(trip));
    }
    trips[it->second].points.push_back(std::move(p));
  }

  for (Trip& trip : trips) {
    std::stable_sort(trip.points.begin(), trip.points.end(),
                     [](const GpsPoint& a, const GpsPoint& b) {
                       return a.timestamp < b.timestamp;
                     });
    derive_inplace(trip.points);
  }
  return trips;
}

}  // namespace haulmap
