#include <benchmark/benchmark.h>

#include "cbp/analytics.hpp"
#include "cbp/collapse.hpp"
#include "cbp/coupling.hpp"
#include "cbp/kernel.hpp"
#include "cbp/limit.hpp"

using namespace cbp;

namespace {

void BM_RhoHat(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0.5);
  const double eps = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rho_hat(k, 3.0, eps));
  }
}
BENCHMARK(BM_RhoHat)->Arg(4)->Arg(6)->Arg(8);

void BM_Malthusian(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(malthusian_rate(k, 1e-10));
  }
}
BENCHMARK(BM_Malthusian);

void BM_GrowLiftedRun(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0);
  const auto n = static_cast<NodeId>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grow_lifted_run(k, n, {}, RngStream(seed++)));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_GrowLiftedRun)->Arg(10000)->Arg(100000);

void BM_CollapsePipeline(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::from_pmf({0.5, 0.5});
  const auto n = static_cast<VertexId>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    RngStream base(seed++);
    RngStream s0 = base.child(0), s1 = base.child(1);
    auto [dp, prefix] = sample_out_degrees(dist, n, s0);
    const auto run = grow_lifted_run(k, prefix.back(), prefix, s1);
    benchmark::DoNotOptimize(collapse_run(run, dp, prefix));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_CollapsePipeline)->Arg(10000)->Arg(100000);

void BM_StoppedTree(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::degenerate(1);
  RngStream rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_stopped_tree(k, dist, 2.0, rng, 1 << 20));
  }
}
BENCHMARK(BM_StoppedTree);

void BM_PageRank(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::from_pmf({0.5, 0.5});
  const auto n = static_cast<VertexId>(state.range(0));
  RngStream base(9);
  RngStream s0 = base.child(0), s1 = base.child(1);
  auto [dp, prefix] = sample_out_degrees(dist, n, s0);
  const auto run = grow_lifted_run(k, prefix.back(), prefix, s1);
  const auto g = collapse_run(run, dp, prefix);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graph_pagerank(g, 0.5, 1e-10));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PageRank)->Arg(10000)->Arg(100000);

void BM_CoupleSingle(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::degenerate(2);
  const VertexId n = 10000;
  RngStream base(11);
  RngStream s0 = base.child(0), s1 = base.child(1);
  auto [dp, prefix] = sample_out_degrees(dist, n, s0);
  const auto run = grow_lifted_run(k, prefix.back(), prefix, s1);
  const auto g = collapse_run(run, dp, prefix);
  RngStream roots = base.child(2);
  std::uint64_t c = 0;
  for (auto _ : state) {
    const VertexId i =
        static_cast<VertexId>(roots.next_below(static_cast<std::uint64_t>(n))) +
        1;
    benchmark::DoNotOptimize(
        couple_single(run, g, i, 2.0, k, dist, base.child(100 + (c++))));
  }
}
BENCHMARK(BM_CoupleSingle);

void BM_CanonicalCode(benchmark::State& state) {
  const auto k = AttachmentKernel::linear(1, 0);
  const auto dist = OutDegreeDistribution::degenerate(1);
  RngStream rng(13);
  std::vector<LocalGraph> trees;
  for (int i = 0; i < 64; ++i) {
    const auto t = sample_stopped_tree(k, dist, 2.0, rng, 1000);
    if (!t.capped) trees.push_back(local_from_tree(t.tree, t.chi));
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonical_code(trees[i++ % trees.size()]));
  }
}
BENCHMARK(BM_CanonicalCode);

}  // namespace

BENCHMARK_MAIN();
