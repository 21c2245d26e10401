#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_tool;     // path to the haulmap binary under test
fs::path g_scratch;     // per-run temp directory

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out = g_scratch / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = g_scratch / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = "\"" + g_tool + "\" " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = g_scratch / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("no subcommand or bad flags exit with a usage error") {
  CHECK(run("").exit_code == 2);
  CHECK(run("--bogus-flag").exit_code == 2);
  CHECK(run("segment").exit_code == 2);  // missing positionals
  CHECK(run("frobnicate in out").exit_code == 2);
}

TEST_CASE("--help exits cleanly and names every subcommand") {
  const auto r = run("--help");
  CHECK(r.exit_code == 0);
  for (const char* sub :
       {"segment", "infer", "mark", "pipeline", "synth", "eval"}) {
    CHECK(r.out.find(sub) != std::string::npos);
  }
}

TEST_CASE("missing and malformed inputs exit with a parse error") {
  CHECK(run("segment no_such_file.csv " + (g_scratch / "x.csv").string())
            .exit_code == 3);

  const auto bad = write_file("bad.csv", "lat,lon\n1,2\n");
  CHECK(run("segment " + bad.string() + " " + (g_scratch / "y.csv").string())
            .exit_code == 3);

  const auto junk = write_file("junk.geojson", "{\"not\": \"geojson\"}\n");
  CHECK(run("mark " + junk.string() + " " + (g_scratch / "z.json").string())
            .exit_code == 3);
}

TEST_CASE("unknown synthetic scenarios list the available ones") {
  const auto r =
      run("synth no_such_place " + (g_scratch / "pts.csv").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("two_lane") != std::string::npos);
}

TEST_CASE("a config file with an unknown key is rejected") {
  const auto cfg = write_file("bad.cfg", "warp_speed = 9\n");
  const auto r = run("synth two_lane " + (g_scratch / "p.csv").string() +
                     " --config " + cfg.string());
  CHECK(r.exit_code == 3);
}

TEST_CASE("synth then segment round-trips and honours the config file") {
  const auto points = g_scratch / "two_lane.csv";
  CHECK(run("synth two_lane " + points.string()).exit_code == 0);

  const auto trips = g_scratch / "trips.csv";
  CHECK(run("segment " + points.string() + " " + trips.string()).exit_code ==
        0);
  const std::string body = slurp(trips);
  CHECK(body.rfind("truck_id,timestamp,x,y,trip_id", 0) == 0);
  CHECK(body.find(",truck000-0\n") != std::string::npos);

  // An impossible minimum point count filters every trip out.
  const auto strict = write_file("strict.cfg", "min_points = 100000\n");
  const auto none = g_scratch / "none.csv";
  CHECK(run("segment " + points.string() + " " + none.string() + " --config " +
            strict.string())
            .exit_code == 0);
  CHECK(slurp(none) == "truck_id,timestamp,x,y,trip_id\n");
}

TEST_CASE("pipeline writes all outputs and eval scores them") {
  const auto points = g_scratch / "pipeline_pts.csv";
  REQUIRE(run("synth two_lane " + points.string()).exit_code == 0);
  const auto outdir = g_scratch / "run";
  const auto r = run("pipeline " + points.string() + " " + outdir.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(outdir / "trips.csv"));
  CHECK(fs::exists(outdir / "graph.geojson"));
  CHECK(fs::exists(outdir / "marked.geojson"));
  CHECK(fs::exists(outdir / "manifest.json"));

  const auto manifest = nlohmann::json::parse(slurp(outdir / "manifest.json"));
  CHECK(manifest.at("command") == "pipeline");
  CHECK(manifest.at("counts").at("trips").get<int>() == 50);
  CHECK(manifest.at("counts").at("areas").get<int>() >= 1);

  const auto ev =
      run("eval " + (outdir / "graph.geojson").string() + " two_lane");
  CHECK(ev.exit_code == 0);
  const auto metrics = nlohmann::json::parse(ev.out);
  CHECK(metrics.at("coverage").get<double>() >= 0.95);
  CHECK(metrics.at("precision").get<double>() >= 0.95);
  CHECK(metrics.at("tolerance").get<double>() == 10.0);
}

TEST_CASE("an impossible round cap exits distinctly but keeps the partial") {
  const auto points = g_scratch / "four_way_pts.csv";
  REQUIRE(run("synth four_way " + points.string()).exit_code == 0);
  const auto outdir = g_scratch / "capped";
  const auto r = run("pipeline " + points.string() + " " + outdir.string() +
                     " --round-cap 1");
  CHECK(r.exit_code == 5);
  // The partially refined map is still persisted for inspection.
  CHECK(fs::exists(outdir / "marked.geojson"));
  CHECK(fs::exists(outdir / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(outdir / "manifest.json"));
  REQUIRE(manifest.at("warnings").is_array());
  CHECK(!manifest.at("warnings").empty());
}

TEST_CASE("flag overrides beat config file values") {
  const auto points = g_scratch / "override_pts.csv";
  REQUIRE(run("synth four_way " + points.string()).exit_code == 0);
  const auto cfg = write_file("cap.cfg", "round_cap = 20\n");
  const auto outdir = g_scratch / "flag_beats_cfg";
  const auto r = run("pipeline " + points.string() + " " + outdir.string() +
                     " --config " + cfg.string() + " --round-cap 1");
  CHECK(r.exit_code == 5);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <haulmap-binary> [doctest args]\n",
                 argv[0]);
    return 1;
  }
  g_tool = argv[1];
  g_scratch = fs::temp_directory_path() /
              ("haulmap_cli_" + std::to_string(::getpid()));
  fs::create_directories(g_scratch);

  std::vector<const char*> args;
  args.push_back(argv[0]);
  for (int i = 2; i < argc; ++i) args.push_back(argv[i]);

  doctest::Context ctx(static_cast<int>(args.size()),
                       const_cast<char**>(args.data()));
  const int rc = ctx.run();
  fs::remove_all(g_scratch);
  return rc;
}
