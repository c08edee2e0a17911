#include <benchmark/benchmark.h>

#include "artic/urdf_io.hpp"
#include "support/test_support.hpp"

namespace {

using artic::testsupport::random_tree;
using artic::testsupport::TreeGenOptions;

artic::kin::KinematicTree tree_of_size(int links) {
  std::mt19937_64 rng(3);
  TreeGenOptions options;
  options.min_links = links;
  options.max_links = links;
  return random_tree(rng, options);
}

void BM_EmitUrdf(benchmark::State& state) {
  const auto tree = tree_of_size(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto text = artic::urdf::emit_urdf(tree);
    benchmark::DoNotOptimize(text.data());
  }
}

void BM_ParseUrdfStrict(benchmark::State& state) {
  const auto text = artic::urdf::emit_urdf(
      tree_of_size(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    auto doc = artic::urdf::parse_urdf(text, artic::urdf::Strictness::kStrict);
    benchmark::DoNotOptimize(doc.tree.links().size());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(text.size()));
}

}  // namespace

BENCHMARK(BM_EmitUrdf)->Arg(4)->Arg(12);
BENCHMARK(BM_ParseUrdfStrict)->Arg(4)->Arg(12);
