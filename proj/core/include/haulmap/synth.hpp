#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "haulmap/road_graph.hpp"
#include "haulmap/trace.hpp"

namespace haulmap {

struct TripPlan {
  std::vector<std::size_t> lanes;  // indices into Scenario::lanes, in order
  double speed = 10.0;             // metres/second, constant over the trip
};

// Ground truth for synthetic data: directed lane centrelines plus the trips
// driven over them. Generation is a pure function of rng_seed.
struct Scenario {
  std::vector<Polyline> lanes;
  std::vector<TripPlan> trips;
  double noise_sigma = 0.0;   // metres, isotropic Gaussian per point
  double sample_period = 6.0; // seconds
  std::uint64_t rng_seed = 1;
};

// Built-in scenario library: "two_lane", "loop", "y_merge", "four_way",
// "bench". Throws InvariantViolation for unknown names.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

// Key = value file, one entry per line, '#' comments. Keys: noise_sigma,
// sample_period, rng_seed, lane (repeatable; "x,y x,y ..."), trip
// (repeatable; "lane indices @ speed"). Unknown keys are errors.
Scenario load_scenario(std::istream& in);
Scenario load_scenario_file(const std::string& path);

// One RawTrace per trip plan (truck ids "truck000", "truck001", ...).
// The lane sequence is traversed at constant speed and sampled every
// sample_period seconds from the start; when the final sample falls more
// than a quarter step short of the end, the endpoint is appended so lane
// ends stay represented. Gaussian noise of noise_sigma is added per point.
std::vector<RawTrace> generate_trips(const Scenario& scenario);

struct EvalMetrics {
  double coverage = 0.0;               // lane length near an inferred edge
  double precision = 1.0;              // edge length near a lane
  std::optional<double> mean_offset;   // mean edge-sample distance to lanes
};

// Compares an inferred graph against scenario ground truth by sampling both
// polyline sets every metre. An empty graph scores coverage 0, precision 1
// (vacuous), and no mean_offset.
EvalMetrics evaluate(const RoadGraph& graph, const Scenario& scenario,
                     double tolerance);

}  // namespace haulmap
