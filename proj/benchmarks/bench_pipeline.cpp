// Micro benchmarks for the pipeline hot paths: trip segmentation, incremental
// clustering, area refinement, and the polygon kernel underneath them.

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "haulmap/area_marking.hpp"
#include "haulmap/config.hpp"
#include "haulmap/map_inference.hpp"
#include "haulmap/synth.hpp"
#include "haulmap/trace.hpp"

namespace {

using namespace haulmap;

const PipelineConfig& config() {
  static const PipelineConfig cfg;
  return cfg;
}

const std::vector<RawTrace>& traces(const std::string& name) {
  static std::map<std::string, std::vector<RawTrace>> cache;
  auto it = cache.find(name);
  if (it == cache.end())
    it = cache.emplace(name, generate_trips(builtin_scenario(name))).first;
  return it->second;
}

const std::vector<Trip>& trips(const std::string& name) {
  static std::map<std::string, std::vector<Trip>> cache;
  auto it = cache.find(name);
  if (it == cache.end())
    it = cache.emplace(name, segment_all(traces(name), config())).first;
  return it->second;
}

const RoadGraph& graph(const std::string& name) {
  static std::map<std::string, RoadGraph> cache;
  auto it = cache.find(name);
  if (it == cache.end())
    it = cache.emplace(name, infer_graph(trips(name), config())).first;
  return it->second;
}

void BM_SegmentTraces(benchmark::State& state) {
  const auto& input = traces("bench");
  for (auto _ : state) {
    auto out = segment_all(input, config());
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_SegmentTraces);

void BM_InferGraphTwoLane(benchmark::State& state) {
  const auto& input = trips("two_lane");
  for (auto _ : state) {
    auto g = infer_graph(input, config());
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_InferGraphTwoLane);

void BM_InferGraphBench(benchmark::State& state) {
  const auto& input = trips("bench");
  for (auto _ : state) {
    auto g = infer_graph(input, config());
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_InferGraphBench);

void BM_PlaceMarkers(benchmark::State& state) {
  const auto& g = graph("four_way");
  for (auto _ : state) {
    auto markers = place_markers(g, config());
    benchmark::DoNotOptimize(markers);
  }
}
BENCHMARK(BM_PlaceMarkers);

void BM_MarkAreasFourWay(benchmark::State& state) {
  const auto& g = graph("four_way");
  for (auto _ : state) {
    auto m = mark_areas(g, config());
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_MarkAreasFourWay);

void BM_MarkAreasBench(benchmark::State& state) {
  const auto& g = graph("bench");
  for (auto _ : state) {
    auto m = mark_areas(g, config());
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_MarkAreasBench);

void BM_SectorUnion(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  geom::MultiPolygon sectors;
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * geom::pi * i / n;
    sectors.push_back(geom::make_sector({30.0 * (i % 7), 30.0 * (i % 5)},
                                        angle, 30.0, 2.0 * geom::pi / 3.0, 16));
  }
  for (auto _ : state) {
    auto merged = geom::union_all(sectors);
    benchmark::DoNotOptimize(merged);
  }
}
BENCHMARK(BM_SectorUnion)->Arg(8)->Arg(64)->Arg(256);

void BM_CloseComponents(benchmark::State& state) {
  geom::MultiPolygon squares;
  for (int i = 0; i < 32; ++i) {
    const double x = 45.0 * i;
    geom::Polygon p;
    p.exterior = {{x, 0}, {x + 30, 0}, {x + 30, 30}, {x, 30}, {x, 0}};
    squares.push_back(p);
  }
  const auto merged = geom::union_all(squares);
  for (auto _ : state) {
    auto closed = geom::close_components(merged, 11.0, 10.0, 16);
    benchmark::DoNotOptimize(closed);
  }
}
BENCHMARK(BM_CloseComponents);

void BM_Evaluate(benchmark::State& state) {
  const Scenario scenario = builtin_scenario("bench");
  const auto& g = graph("bench");
  for (auto _ : state) {
    auto metrics = evaluate(g, scenario, 10.0);
    benchmark::DoNotOptimize(metrics);
  }
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
