#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "roadseg/postprocess.hpp"
#include "roadseg/projection.hpp"

using namespace roadseg;

namespace {

PointCloud synthetic_cloud(std::size_t count) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> theta(-50.0, 50.0);
  std::uniform_real_distribution<double> phi(-24.0, 1.9);
  std::uniform_real_distribution<double> range(2.0, 70.0);
  constexpr double kRad = std::numbers::pi / 180.0;
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = theta(rng) * kRad, f = phi(rng) * kRad, r = range(rng);
    cloud.points.push_back(Point{static_cast<float>(r * std::cos(f) * std::cos(t)),
                                 static_cast<float>(r * std::cos(f) * std::sin(t)),
                                 static_cast<float>(r * std::sin(f)), 0.5f});
  }
  return cloud;
}

void BuildFeatureTensor(benchmark::State& state) {
  const PointCloud cloud = synthetic_cloud(120000);
  const GridSpec g;
  for (auto _ : state) {
    FeatureTensor t = build_feature_tensor(cloud, g);
    benchmark::DoNotOptimize(t.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BuildFeatureTensor)->Unit(benchmark::kMillisecond);

void CoverageStats(benchmark::State& state) {
  const PointCloud cloud = synthetic_cloud(120000);
  for (auto _ : state) {
    CoverageReport r =
        coverage_stats(cloud, GridSpec{}, std::nullopt, BevSpec{}, ImageDims{}, false);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(CoverageStats)->Unit(benchmark::kMillisecond);

void FillPolygon(benchmark::State& state) {
  // A jagged 40-vertex star over the full 800x400 BEV grid.
  std::mt19937_64 rng(9);
  Polygon poly;
  for (int k = 0; k < 40; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 40.0;
    const double r = 80.0 + static_cast<double>(rng() % 240);
    poly.vertices.push_back(Vertex{400.0 + r * std::cos(a), 200.0 + r * std::sin(a)});
  }
  const BevSpec bev;
  for (auto _ : state) {
    RoadMask mask = fill_polygon(poly, bev);
    benchmark::DoNotOptimize(mask.cells.data());
  }
}
BENCHMARK(FillPolygon)->Unit(benchmark::kMillisecond);

}  // namespace
