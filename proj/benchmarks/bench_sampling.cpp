#include <benchmark/benchmark.h>

#include "artic/geometry.hpp"

namespace {

artic::geom::TriangleMesh unit_cube() {
  artic::geom::TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                   {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  mesh.triangles = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                    {0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5},
                    {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return mesh;
}

void BM_SampleSurface(benchmark::State& state) {
  const auto mesh = unit_cube();
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto cloud = artic::geom::sample_surface(mesh, count, 7);
    benchmark::DoNotOptimize(cloud.points.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(count));
}

void BM_NormalizePart(benchmark::State& state) {
  const auto mesh = unit_cube();
  const auto cloud =
      artic::geom::sample_surface(mesh, static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    auto normalized = artic::geom::normalize_part(cloud);
    benchmark::DoNotOptimize(normalized.points.data());
  }
}

}  // namespace

BENCHMARK(BM_SampleSurface)->Arg(1024)->Arg(8192)->Arg(65536);
BENCHMARK(BM_NormalizePart)->Arg(8192)->Arg(65536);
