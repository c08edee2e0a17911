#include <benchmark/benchmark.h>

#include "artic/metrics.hpp"
#include "support/test_support.hpp"

namespace {

using artic::testsupport::random_tree;
using artic::testsupport::TreeGenOptions;

void BM_Evaluate(benchmark::State& state) {
  std::mt19937_64 rng(7);
  TreeGenOptions options;
  options.min_links = static_cast<int>(state.range(0));
  options.max_links = static_cast<int>(state.range(0));
  auto pred = random_tree(rng, options);
  auto gt = random_tree(rng, options);
  for (auto _ : state) {
    auto report = artic::metrics::evaluate(pred, gt);
    benchmark::DoNotOptimize(report.tc);
  }
}

void BM_WorldJointFrames(benchmark::State& state) {
  std::mt19937_64 rng(9);
  TreeGenOptions options;
  options.min_links = static_cast<int>(state.range(0));
  options.max_links = static_cast<int>(state.range(0));
  auto tree = random_tree(rng, options);
  for (auto _ : state) {
    auto frames = artic::metrics::world_joint_frames(tree);
    benchmark::DoNotOptimize(frames.size());
  }
}

void BM_EvaluateBatch(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const int objects = static_cast<int>(state.range(0));
  std::vector<artic::kin::KinematicTree> trees;
  trees.reserve(static_cast<std::size_t>(objects) * 2);
  for (int i = 0; i < objects * 2; ++i) trees.push_back(random_tree(rng));
  std::vector<artic::metrics::BatchItem> items;
  for (int i = 0; i < objects; ++i) {
    items.push_back({"obj" + std::to_string(i), &trees[2 * i],
                     &trees[2 * i + 1]});
  }
  for (auto _ : state) {
    auto reports = artic::metrics::evaluate_batch(items, {});
    benchmark::DoNotOptimize(reports.size());
  }
}

}  // namespace

BENCHMARK(BM_Evaluate)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK(BM_WorldJointFrames)->Arg(4)->Arg(12);
BENCHMARK(BM_EvaluateBatch)->Arg(8)->Arg(64);
