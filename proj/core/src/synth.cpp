#include "haulmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "haulmap/errors.hpp"
#include "haulmap/geometry.hpp"

namespace haulmap {

namespace {

// Deterministic Gaussian source: top-53-bit uniforms from mt19937_64 fed
// through Box-Muller, two variates per draw.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::pair<double, double> pair() {
    const double u1 = 1.0 - unit();  // (0, 1]: keeps log finite
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * geom::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::mt19937_64 rng_;
};

void validate_scenario(const Scenario& s) {
  if (!(s.sample_period > 0.0) || !std::isfinite(s.sample_period)) {
    throw InvariantViolation("scenario sample_period must be positive");
  }
  if (!(s.noise_sigma >= 0.0) || !std::isfinite(s.noise_sigma)) {
    throw InvariantViolation("scenario noise_sigma must be non-negative");
  }
  for (std::size_t i = 0; i < s.lanes.size(); ++i) {
    const Polyline& lane = s.lanes[i];
    if (lane.size() < 2 || !(geom::length(lane) > 0.0)) {
      throw InvariantViolation("scenario lane " + std::to_string(i) +
                               " must have positive length");
    }
    for (const Point& p : lane) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InvariantViolation("scenario lane " + std::to_string(i) +
                                 " has a non-finite coordinate");
      }
    }
  }
  for (std::size_t i = 0; i < s.trips.size(); ++i) {
    const TripPlan& plan = s.trips[i];
    if (plan.lanes.empty()) {
      throw InvariantViolation("scenario trip " + std::to_string(i) +
                               " references no lanes");
    }
    for (std::size_t lane : plan.lanes) {
      if (lane >= s.lanes.size()) {
        throw InvariantViolation("scenario trip " + std::to_string(i) +
                                 " references unknown lane " +
                                 std::to_string(lane));
      }
    }
    if (!(plan.speed > 0.0) || !std::isfinite(plan.speed)) {
      throw InvariantViolation("scenario trip " + std::to_string(i) +
                               " must have positive speed");
    }
  }
}

Polyline concatenate(const Scenario& s, const TripPlan& plan) {
  Polyline path;
  for (std::size_t lane : plan.lanes) {
    for (const Point& p : s.lanes[lane]) {
      if (!path.empty() && geom::distance(path.back(), p) == 0.0) continue;
      path.push_back(p);
    }
  }
  return path;
}

Point point_at(const Polyline& path, double station) {
  double remaining = std::max(station, 0.0);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double seg = geom::distance(path[i], path[i + 1]);
    if (seg <= 0.0) continue;
    if (remaining <= seg) {
      const double t = remaining / seg;
      return {path[i].x + t * (path[i + 1].x - path[i].x),
              path[i].y + t * (path[i + 1].y - path[i].y)};
    }
    remaining -= seg;
  }
  return path.back();
}

std::string truck_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "truck%03zu", index);
  return buf;
}

// --- built-in scenarios ----------------------------------------------------

void add_trips(Scenario& s, int count, std::vector<std::size_t> lanes,
               double speed) {
  for (int i = 0; i < count; ++i) s.trips.push_back({lanes, speed});
}

// Two straight 600 m lanes 15 m apart carrying opposite directions.
Scenario make_two_lane() {
  Scenario s;
  s.lanes.push_back({{0.0, 0.0}, {600.0, 0.0}});
  s.lanes.push_back({{600.0, 15.0}, {0.0, 15.0}});
  add_trips(s, 25, {0}, 10.0);
  add_trips(s, 25, {1}, 10.0);
  s.noise_sigma = 1.0;
  s.rng_seed = 101;
  return s;
}

// A 150 m-radius circular circuit with an access road in at the bottom and
// an exit road out at the top. Half the trucks cross the circuit top to
// bottom, half drive the full circle back to the access junction.
Scenario make_loop() {
  Scenario s;
  const double r = 150.0;
  const Point c{0.0, 150.0};
  Polyline east, west;
  for (int i = 0; i <= 12; ++i) {  // 15 degree chords
    const double th = -geom::pi / 2 + i * (geom::pi / 12);
    east.push_back({c.x + r * std::cos(th), c.y + r * std::sin(th)});
  }
  for (int i = 0; i <= 12; ++i) {
    const double th = geom::pi / 2 + i * (geom::pi / 12);
    west.push_back({c.x + r * std::cos(th), c.y + r * std::sin(th)});
  }
  s.lanes.push_back(east);                           // 0: bottom -> top
  s.lanes.push_back(west);                           // 1: top -> bottom
  s.lanes.push_back({{-120.0, 0.0}, {0.0, 0.0}});    // 2: access in
  s.lanes.push_back({{0.0, 300.0}, {0.0, 420.0}});   // 3: exit out
  add_trips(s, 8, {2, 0, 3}, 10.0);
  add_trips(s, 8, {2, 0, 1}, 10.0);
  s.noise_sigma = 0.5;
  s.rng_seed = 7;
  return s;
}

// Two approach lanes merging into one eastbound lane.
Scenario make_y_merge() {
  Scenario s;
  s.lanes.push_back({{-240.0, 120.0}, {0.0, 0.0}});   // 0: from northwest
  s.lanes.push_back({{-240.0, -120.0}, {0.0, 0.0}});  // 1: from southwest
  s.lanes.push_back({{0.0, 0.0}, {360.0, 0.0}});      // 2: merged, east
  add_trips(s, 6, {0, 2}, 10.0);
  add_trips(s, 6, {1, 2}, 10.0);
  s.noise_sigma = 0.75;
  s.rng_seed = 23;
  return s;
}

// A four-way junction: straight west-east and south-north movements plus
// right turns south-east, and a wide turning pocket east of the junction
// used by the west-north movement (a 240 m rhombus that leaves the junction
// and rejoins it, the shape wide turning trucks carve at real intersections).
Scenario make_four_way() {
  Scenario s;
  s.lanes.push_back({{-300.0, 0.0}, {0.0, 0.0}});  // 0: west in
  s.lanes.push_back({{0.0, 0.0}, {300.0, 0.0}});   // 1: east out
  s.lanes.push_back({{0.0, -300.0}, {0.0, 0.0}});  // 2: south in
  s.lanes.push_back({{0.0, 0.0}, {0.0, 300.0}});   // 3: north out
  s.lanes.push_back({{0.0, 0.0},                   // 4: turning pocket
                     {30.0, -51.9615242270663},
                     {81.9615242270663, -21.9615242270663},
                     {51.9615242270663, 30.0},
                     {0.0, 0.0}});
  add_trips(s, 8, {0, 1}, 10.0);
  add_trips(s, 8, {2, 3}, 10.0);
  add_trips(s, 4, {0, 4, 3}, 10.0);
  add_trips(s, 4, {2, 1}, 10.0);
  s.noise_sigma = 0.75;
  s.rng_seed = 11;
  return s;
}

// A dense free-drive pocket: 20 trucks enter on a shared access lane, wander
// a 100 x 100 m yard along per-truck waypoint routes, and leave on a second
// access lane 30 m north of the first.
Scenario make_bench() {
  Scenario s;
  s.lanes.push_back({{-420.0, 40.0}, {0.0, 40.0}});  // 0: access in
  s.lanes.push_back({{0.0, 70.0}, {-420.0, 70.0}});  // 1: access out
  GaussianSampler waypoints(987654321);              // scenario shape, fixed
  for (int k = 0; k < 20; ++k) {
    Polyline lane;
    lane.push_back({0.0, 40.0});
    for (int w = 0; w < 6; ++w) {
      const double x = 15.0 + 70.0 * waypoints.unit();
      const double y = 10.0 + 80.0 * waypoints.unit();
      lane.push_back({x, y});
    }
    lane.push_back({0.0, 70.0});
    s.lanes.push_back(lane);
  }
  for (std::size_t k = 0; k < 20; ++k) {
    s.trips.push_back({{0, 2 + k, 1}, 8.0});
  }
  s.noise_sigma = 0.6;
  s.rng_seed = 42;
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"bench", "four_way", "loop", "two_lane", "y_merge"};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "two_lane") return make_two_lane();
  if (name == "loop") return make_loop();
  if (name == "y_merge") return make_y_merge();
  if (name == "four_way") return make_four_way();
  if (name == "bench") return make_bench();
  throw InvariantViolation("unknown scenario: " + name);
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) {
      throw std::invalid_argument(text);
    }
    return value;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + text + "'", line);
  }
}

Polyline parse_lane(const std::string& text, std::size_t line) {
  Polyline lane;
  std::istringstream tokens(text);
  std::string token;
  while (tokens >> token) {
    const auto comma = token.find(',');
    if (comma == std::string::npos) {
      throw ParseError("lane point '" + token + "' is not x,y", line);
    }
    lane.push_back({parse_double(token.substr(0, comma), line),
                    parse_double(token.substr(comma + 1), line)});
  }
  if (lane.size() < 2) {
    throw ParseError("lane needs at least two points", line);
  }
  return lane;
}

TripPlan parse_trip(const std::string& text, std::size_t line) {
  const auto at = text.find('@');
  if (at == std::string::npos) {
    throw ParseError("trip needs '@ speed'", line);
  }
  TripPlan plan;
  std::istringstream tokens(text.substr(0, at));
  std::string token;
  while (tokens >> token) {
    try {
      std::size_t used = 0;
      const long index = std::stol(token, &used);
      if (used != token.size() || index < 0) throw std::invalid_argument(token);
      plan.lanes.push_back(static_cast<std::size_t>(index));
    } catch (const std::exception&) {
      throw ParseError("bad lane index '" + token + "'", line);
    }
  }
  if (plan.lanes.empty()) {
    throw ParseError("trip references no lanes", line);
  }
  plan.speed = parse_double(trim(text.substr(at + 1)), line);
  return plan;
}

}  // namespace

Scenario load_scenario(std::istream& in) {
  Scenario s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key = value", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "noise_sigma") {
      s.noise_sigma = parse_double(value, line_no);
    } else if (key == "sample_period") {
      s.sample_period = parse_double(value, line_no);
    } else if (key == "rng_seed") {
      try {
        s.rng_seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ParseError("bad seed '" + value + "'", line_no);
      }
    } else if (key == "lane") {
      s.lanes.push_back(parse_lane(value, line_no));
    } else if (key == "trip") {
      s.trips.push_back(parse_trip(value, line_no));
    } else {
      throw ParseError("unknown scenario key '" + key + "'", line_no);
    }
  }
  try {
    validate_scenario(s);
  } catch (const InvariantViolation& e) {
    throw ParseError(e.what(), line_no);
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path);
  return load_scenario(in);
}

std::vector<RawTrace> generate_trips(const Scenario& scenario) {
  validate_scenario(scenario);
  GaussianSampler noise(scenario.rng_seed);
  std::vector<RawTrace> traces;
  traces.reserve(scenario.trips.size());
  for (std::size_t k = 0; k < scenario.trips.size(); ++k) {
    const TripPlan& plan = scenario.trips[k];
    const Polyline path = concatenate(scenario, plan);
    const double total = geom::length(path);
    const double step = plan.speed * scenario.sample_period;

    std::vector<std::pair<double, double>> stations;  // (distance, time)
    for (std::size_t i = 0; i * step <= total + 1e-9; ++i) {
      stations.emplace_back(std::min(i * step, total),
                            i * scenario.sample_period);
    }
    if (total - stations.back().first >= 0.25 * step) {
      stations.emplace_back(total, total / plan.speed);
    }

    RawTrace trace;
    trace.truck_id = truck_name(k);
    for (const auto& [station, time] : stations) {
      GpsPoint p;
      p.truck_id = trace.truck_id;
      p.timestamp = time;
      p.position = point_at(path, station);
      if (scenario.noise_sigma > 0.0) {
        const auto [nx, ny] = noise.pair();
        p.position.x += scenario.noise_sigma * nx;
        p.position.y += scenario.noise_sigma * ny;
      }
      trace.points.push_back(std::move(p));
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

namespace {

// Points every metre along the polyline, endpoints always included.
std::vector<Point> sample_polyline(const Polyline& line) {
  std::vector<Point> samples;
  const double total = geom::length(line);
  samples.push_back(line.front());
  for (double s = 1.0; s < total; s += 1.0) {
    samples.push_back(point_at(line, s));
  }
  if (total > 0.0) samples.push_back(line.back());
  return samples;
}

double distance_to_polyline(const Point& p, const Polyline& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, geom::point_segment_distance(p, line[i], line[i + 1]));
  }
  if (line.size() == 1) best = geom::distance(p, line.front());
  return best;
}

double distance_to_any(const Point& p, const std::vector<Polyline>& lines) {
  double best = std::numeric_limits<double>::infinity();
  for (const Polyline& line : lines) {
    best = std::min(best, distance_to_polyline(p, line));
  }
  return best;
}

}  // namespace

EvalMetrics evaluate(const RoadGraph& graph, const Scenario& scenario,
                     double tolerance) {
  std::vector<Polyline> edges;
  for (EdgeId id : graph.edge_ids()) {
    edges.push_back(graph.edge(id).polyline);
  }

  EvalMetrics m;

  std::size_t lane_samples = 0, lane_hits = 0;
  for (const Polyline& lane : scenario.lanes) {
    for (const Point& p : sample_polyline(lane)) {
      ++lane_samples;
      if (!edges.empty() && distance_to_any(p, edges) <= tolerance) {
        ++lane_hits;
      }
    }
  }
  m.coverage = lane_samples == 0
                   ? 1.0
                   : static_cast<double>(lane_hits) / lane_samples;

  std::size_t edge_samples = 0, edge_hits = 0;
  double offset_sum = 0.0;
  for (const Polyline& edge : edges) {
    for (const Point& p : sample_polyline(edge)) {
      ++edge_samples;
      const double d = scenario.lanes.empty()
                           ? std::numeric_limits<double>::infinity()
                           : distance_to_any(p, scenario.lanes);
      if (d <= tolerance) ++edge_hits;
      offset_sum += d;
    }
  }
  if (edge_samples == 0) {
    m.precision = 1.0;
  } else {
    m.precision = static_cast<double>(edge_hits) / edge_samples;
    if (!scenario.lanes.empty()) {
      m.mean_offset = offset_sum / static_cast<double>(edge_samples);
    }
  }
  return m;
}

}  // namespace haulmap
