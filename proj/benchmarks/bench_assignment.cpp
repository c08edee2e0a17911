#include <benchmark/benchmark.h>

#include <random>

#include "artic/assignment.hpp"

namespace {

std::vector<double> random_cost(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (double& c : cost) {
    c = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 10.0;
  }
  return cost;
}

void BM_AssignmentSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cost = random_cost(n, 42);
  for (auto _ : state) {
    auto result = artic::assignment::solve(cost, n, n);
    benchmark::DoNotOptimize(result.total_cost);
  }
  state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(BM_AssignmentSolve)->RangeMultiplier(2)->Range(4, 256)->Complexity();
