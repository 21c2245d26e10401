// haulmap: batch pipeline from haul-truck GPS logs to a cleaned road network
// with marked free-drive areas. Subcommands cover each stage plus synthetic
// data generation and ground-truth comparison.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "haulmap/area_marking.hpp"
#include "haulmap/config.hpp"
#include "haulmap/errors.hpp"
#include "haulmap/geojson.hpp"
#include "haulmap/map_inference.hpp"
#include "haulmap/synth.hpp"
#include "haulmap/trace.hpp"

namespace fs = std::filesystem;
using haulmap::ExitCode;
using nlohmann::ordered_json;

namespace {

// Argument-level mistakes detected after CLI11 parsing (unknown scenario
// names and the like); mapped to ExitCode::bad_arguments.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  bool latlon = false;
  std::optional<double> seed_radius;
  std::optional<double> marker_radius;
  std::optional<int> round_cap;
  double tolerance = 10.0;
  std::string out_path;  // eval only
};

haulmap::PipelineConfig effective_config(const Options& o) {
  haulmap::PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = haulmap::load_config_file(o.config_path);
  if (o.seed_radius) cfg.seed_radius = *o.seed_radius;
  if (o.marker_radius) cfg.marker_radius = *o.marker_radius;
  if (o.round_cap) cfg.round_cap = *o.round_cap;
  cfg.validate();
  return cfg;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_file_atomic(const std::string& path, const std::string& text) {
  fs::path target(path);
  fs::path tmp(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw haulmap::ParseError("cannot open " + path);
  return in;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// The effective config as a JSON object, values in their exact textual form.
ordered_json config_json(const haulmap::PipelineConfig& cfg) {
  ordered_json obj = ordered_json::object();
  std::istringstream lines(haulmap::config_to_string(cfg));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    obj[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return obj;
}

ordered_json manifest_base(const std::string& command,
                           const haulmap::PipelineConfig& cfg,
                           std::vector<std::string> inputs,
                           std::vector<std::string> outputs) {
  ordered_json doc;
  doc["command"] = command;
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  doc["config"] = config_json(cfg);
  doc["counts"] = ordered_json::object();
  doc["warnings"] = ordered_json::array();
  doc["timings_ms"] = ordered_json::object();
  return doc;
}

void write_manifest(const std::string& path, const ordered_json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::string points_csv(const std::vector<haulmap::RawTrace>& traces) {
  std::string text = "truck_id,timestamp,x,y\n";
  for (const haulmap::RawTrace& trace : traces) {
    for (const haulmap::GpsPoint& p : trace.points) {
      text += p.truck_id;
      text += ',';
      text += format_double(p.timestamp);
      text += ',';
      text += format_double(p.position.x);
      text += ',';
      text += format_double(p.position.y);
      text += '\n';
    }
  }
  return text;
}

haulmap::Scenario resolve_scenario(const std::string& name) {
  const auto names = haulmap::builtin_scenario_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    return haulmap::builtin_scenario(name);
  }
  if (fs::exists(name)) {
    return haulmap::load_scenario_file(name);
  }
  std::string known;
  for (const std::string& n : names) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  throw UsageError("unknown scenario '" + name +
                   "' (not a built-in: " + known + "; not a file)");
}

// --- subcommands ------------------------------------------------------------

int cmd_segment(const std::string& in_path, const std::string& out_path,
                const Options& opts) {
  const auto cfg = effective_config(opts);
  Stopwatch total;

  auto in = open_input(in_path);
  haulmap::LoadOptions load;
  load.latlon = opts.latlon;
  const auto loaded = haulmap::load_points(in, load);
  const auto trips = haulmap::segment_all(loaded.traces, cfg);

  std::ostringstream csv;
  haulmap::write_trips_csv(csv, trips);
  write_file_atomic(out_path, csv.str());

  ordered_json manifest =
      manifest_base("segment", cfg, {in_path}, {out_path});
  manifest["counts"]["traces"] = loaded.traces.size();
  manifest["counts"]["trips"] = trips.size();
  if (loaded.duplicates_dropped > 0) {
    manifest["warnings"].push_back(
        std::to_string(loaded.duplicates_dropped) +
        " duplicate rows dropped");
  }
  manifest["timings_ms"]["total"] = total.ms();
  write_manifest(out_path + ".manifest.json", manifest);

  std::cout << "segmented " << loaded.traces.size() << " traces into "
            << trips.size() << " trips\n";
  return 0;
}

int cmd_infer(const std::string& trips_path, const std::string& out_path,
              const Options& opts) {
  const auto cfg = effective_config(opts);
  Stopwatch total;

  auto in = open_input(trips_path);
  const auto trips = haulmap::read_trips_csv(in);
  const auto clustered = haulmap::cluster_points(trips, cfg);
  haulmap::RoadGraph graph = haulmap::build_edges(clustered);
  haulmap::sparsify(graph, cfg.sparsify_corridor);
  haulmap::prune_low_support(graph, cfg.min_edge_support);

  write_file_atomic(out_path, haulmap::to_text(haulmap::graph_to_geojson(graph)));

  ordered_json manifest = manifest_base("infer", cfg, {trips_path}, {out_path});
  manifest["counts"]["trips"] = trips.size();
  manifest["counts"]["clusters"] = clustered.clusters.size();
  manifest["counts"]["vertices"] = graph.vertex_count();
  manifest["counts"]["edges"] = graph.edge_count();
  manifest["timings_ms"]["total"] = total.ms();
  write_manifest(out_path + ".manifest.json", manifest);

  std::cout << "inferred " << graph.vertex_count() << " vertices and "
            << graph.edge_count() << " edges\n";
  return 0;
}

int cmd_mark(const std::string& graph_path, const std::string& out_path,
             const Options& opts) {
  const auto cfg = effective_config(opts);
  Stopwatch total;

  auto in = open_input(graph_path);
  const auto graph =
      haulmap::graph_from_geojson(haulmap::parse_json(in, graph_path));
  const auto marked = haulmap::mark_areas(graph, cfg);

  write_file_atomic(out_path, haulmap::to_text(haulmap::marked_map_to_geojson(marked)));

  ordered_json manifest = manifest_base("mark", cfg, {graph_path}, {out_path});
  manifest["counts"]["vertices"] = marked.graph.vertex_count();
  manifest["counts"]["edges"] = marked.graph.edge_count();
  manifest["counts"]["areas"] = marked.areas.size();
  manifest["counts"]["rounds"] = marked.rounds;
  manifest["timings_ms"]["total"] = total.ms();
  write_manifest(out_path + ".manifest.json", manifest);

  std::cout << "marked " << marked.areas.size() << " areas in "
            << marked.rounds << " rounds\n";
  return 0;
}

int cmd_pipeline(const std::string& in_path, const std::string& outdir,
                 const Options& opts) {
  const auto cfg = effective_config(opts);
  fs::create_directories(outdir);
  const std::string trips_path = (fs::path(outdir) / "trips.csv").string();
  const std::string graph_path = (fs::path(outdir) / "graph.geojson").string();
  const std::string marked_path =
      (fs::path(outdir) / "marked.geojson").string();
  const std::string manifest_path =
      (fs::path(outdir) / "manifest.json").string();

  ordered_json manifest = manifest_base(
      "pipeline", cfg, {in_path}, {trips_path, graph_path, marked_path});
  Stopwatch total;

  Stopwatch segment_watch;
  auto in = open_input(in_path);
  haulmap::LoadOptions load;
  load.latlon = opts.latlon;
  const auto loaded = haulmap::load_points(in, load);
  const auto trips = haulmap::segment_all(loaded.traces, cfg);
  std::ostringstream csv;
  haulmap::write_trips_csv(csv, trips);
  write_file_atomic(trips_path, csv.str());
  manifest["counts"]["traces"] = loaded.traces.size();
  manifest["counts"]["trips"] = trips.size();
  if (loaded.duplicates_dropped > 0) {
    manifest["warnings"].push_back(
        std::to_string(loaded.duplicates_dropped) +
        " duplicate rows dropped");
  }
  manifest["timings_ms"]["segment"] = segment_watch.ms();

  Stopwatch infer_watch;
  const auto clustered = haulmap::cluster_points(trips, cfg);
  haulmap::RoadGraph graph = haulmap::build_edges(clustered);
  haulmap::sparsify(graph, cfg.sparsify_corridor);
  haulmap::prune_low_support(graph, cfg.min_edge_support);
  write_file_atomic(graph_path, haulmap::to_text(haulmap::graph_to_geojson(graph)));
  manifest["counts"]["clusters"] = clustered.clusters.size();
  manifest["counts"]["vertices"] = graph.vertex_count();
  manifest["counts"]["edges"] = graph.edge_count();
  manifest["timings_ms"]["infer"] = infer_watch.ms();

  Stopwatch mark_watch;
  try {
    const auto marked = haulmap::mark_areas(graph, cfg);
    write_file_atomic(marked_path,
                      haulmap::to_text(haulmap::marked_map_to_geojson(marked)));
    manifest["counts"]["vertices"] = marked.graph.vertex_count();
    manifest["counts"]["edges"] = marked.graph.edge_count();
    manifest["counts"]["areas"] = marked.areas.size();
    manifest["counts"]["rounds"] = marked.rounds;
  } catch (const haulmap::NonConvergence& e) {
    // Keep the partial result on disk so the run can be inspected.
    write_file_atomic(
        marked_path,
        haulmap::to_text(haulmap::marked_map_to_geojson(e.partial)));
    manifest["counts"]["areas"] = e.partial.areas.size();
    manifest["counts"]["rounds"] = e.partial.rounds;
    manifest["warnings"].push_back(std::string("mark: ") + e.what());
    manifest["timings_ms"]["mark"] = mark_watch.ms();
    manifest["timings_ms"]["total"] = total.ms();
    write_manifest(manifest_path, manifest);
    throw;
  }
  manifest["timings_ms"]["mark"] = mark_watch.ms();
  manifest["timings_ms"]["total"] = total.ms();
  write_manifest(manifest_path, manifest);

  std::cout << "pipeline wrote " << outdir << " ("
            << manifest["counts"]["vertices"].get<std::size_t>()
            << " vertices, "
            << manifest["counts"]["edges"].get<std::size_t>() << " edges, "
            << manifest["counts"]["areas"].get<std::size_t>() << " areas)\n";
  return 0;
}

int cmd_synth(const std::string& scenario_name, const std::string& out_path,
              const Options& opts) {
  const auto cfg = effective_config(opts);
  Stopwatch total;

  const haulmap::Scenario scenario = resolve_scenario(scenario_name);
  const auto traces = haulmap::generate_trips(scenario);
  write_file_atomic(out_path, points_csv(traces));

  ordered_json manifest =
      manifest_base("synth", cfg, {scenario_name}, {out_path});
  manifest["counts"]["traces"] = traces.size();
  manifest["timings_ms"]["total"] = total.ms();
  write_manifest(out_path + ".manifest.json", manifest);

  std::cout << "generated " << traces.size() << " traces\n";
  return 0;
}

int cmd_eval(const std::string& graph_path, const std::string& scenario_name,
             const Options& opts) {
  auto in = open_input(graph_path);
  const auto graph =
      haulmap::graph_from_geojson(haulmap::parse_json(in, graph_path));
  const haulmap::Scenario scenario = resolve_scenario(scenario_name);
  const auto metrics = haulmap::evaluate(graph, scenario, opts.tolerance);

  ordered_json doc;
  doc["coverage"] = metrics.coverage;
  doc["precision"] = metrics.precision;
  if (metrics.mean_offset) {
    doc["mean_offset"] = *metrics.mean_offset;
  } else {
    doc["mean_offset"] = nullptr;
  }
  doc["tolerance"] = opts.tolerance;

  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!opts.out_path.empty()) write_file_atomic(opts.out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "haul-truck GPS logs to a cleaned road network with free-drive areas"};
  app.require_subcommand(1);

  Options opts;
  std::string arg_a, arg_b;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path,
                    "key = value parameter file");
  };

  CLI::App* segment =
      app.add_subcommand("segment", "split GPS logs into trips");
  segment->add_option("input", arg_a, "points CSV (truck_id,timestamp,x,y)")
      ->required();
  segment->add_option("output", arg_b, "trips CSV")->required();
  add_config(segment);
  segment->add_flag("--latlon", opts.latlon,
                    "input x,y are lon,lat degrees; project to metres");

  CLI::App* infer =
      app.add_subcommand("infer", "build a road graph from trips");
  infer->add_option("input", arg_a, "trips CSV")->required();
  infer->add_option("output", arg_b, "graph GeoJSON")->required();
  add_config(infer);
  infer->add_option("--seed-radius", [&](const CLI::results_t& r) {
    opts.seed_radius = std::stod(r[0]);
    return true;
  }, "cluster join radius, metres");

  CLI::App* mark =
      app.add_subcommand("mark", "mark free-drive areas on a graph");
  mark->add_option("input", arg_a, "graph GeoJSON")->required();
  mark->add_option("output", arg_b, "marked map GeoJSON")->required();
  add_config(mark);
  mark->add_option("--marker-radius", [&](const CLI::results_t& r) {
    opts.marker_radius = std::stod(r[0]);
    return true;
  }, "sector radius, metres");
  mark->add_option("--round-cap", [&](const CLI::results_t& r) {
    opts.round_cap = std::stoi(r[0]);
    return true;
  }, "refinement rounds before giving up");

  CLI::App* pipeline =
      app.add_subcommand("pipeline", "segment + infer + mark in one run");
  pipeline->add_option("input", arg_a, "points CSV")->required();
  pipeline->add_option("outdir", arg_b, "output directory")->required();
  add_config(pipeline);
  pipeline->add_flag("--latlon", opts.latlon,
                     "input x,y are lon,lat degrees; project to metres");
  pipeline->add_option("--seed-radius", [&](const CLI::results_t& r) {
    opts.seed_radius = std::stod(r[0]);
    return true;
  }, "cluster join radius, metres");
  pipeline->add_option("--marker-radius", [&](const CLI::results_t& r) {
    opts.marker_radius = std::stod(r[0]);
    return true;
  }, "sector radius, metres");
  pipeline->add_option("--round-cap", [&](const CLI::results_t& r) {
    opts.round_cap = std::stoi(r[0]);
    return true;
  }, "refinement rounds before giving up");

  CLI::App* synth =
      app.add_subcommand("synth", "generate GPS logs for a scenario");
  synth->add_option("scenario", arg_a, "built-in name or scenario file")
      ->required();
  synth->add_option("output", arg_b, "points CSV")->required();
  add_config(synth);

  CLI::App* eval =
      app.add_subcommand("eval", "compare a graph against scenario truth");
  eval->add_option("graph", arg_a, "graph GeoJSON")->required();
  eval->add_option("scenario", arg_b, "built-in name or scenario file")
      ->required();
  eval->add_option("--tolerance", opts.tolerance,
                   "match distance, metres (default 10)");
  eval->add_option("--out", opts.out_path, "also write the metrics JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::bad_arguments);
  }

  try {
    if (app.got_subcommand(segment)) return cmd_segment(arg_a, arg_b, opts);
    if (app.got_subcommand(infer)) return cmd_infer(arg_a, arg_b, opts);
    if (app.got_subcommand(mark)) return cmd_mark(arg_a, arg_b, opts);
    if (app.got_subcommand(pipeline)) return cmd_pipeline(arg_a, arg_b, opts);
    if (app.got_subcommand(synth)) return cmd_synth(arg_a, arg_b, opts);
    if (app.got_subcommand(eval)) return cmd_eval(arg_a, arg_b, opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::bad_arguments);
  } catch (const haulmap::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::parse_error);
  } catch (const haulmap::NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::non_convergence);
  } catch (const haulmap::InvariantViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::invariant_violation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
