#include <benchmark/benchmark.h>

#include "motdual/discretize.hpp"
#include "motdual/lifting.hpp"
#include "motdual/marginals.hpp"
#include "motdual/mot.hpp"
#include "motdual/paths.hpp"

using namespace motdual;

namespace {

PathTree make_tree(int N, int m, int J) {
  TreeConfig c;
  c.N = N;
  c.max_jumps = m;
  c.J = J;
  return PathTree::build(c);
}

void BM_PrimalLp(benchmark::State& state) {
  PathTree tree = make_tree(2, static_cast<int>(state.range(0)), 2);
  Rng rng(1);
  GridMarginal nu = random_terminal_marginal(tree, rng);
  for (auto _ : state) benchmark::DoNotOptimize(primal_lp(tree, Claim::lookback_max(), nu).value);
  state.counters["nodes"] = tree.size();
}
BENCHMARK(BM_PrimalLp)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_DualLp(benchmark::State& state) {
  PathTree tree = make_tree(2, static_cast<int>(state.range(0)), 2);
  Rng rng(1);
  GridMarginal nu = random_terminal_marginal(tree, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dual_lp(tree, Claim::lookback_max(), nu).value);
  state.counters["nodes"] = tree.size();
}
BENCHMARK(BM_DualLp)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_CrossingTimes(benchmark::State& state) {
  PathGeneratorConfig cfg;
  cfg.step_count = 256;
  cfg.volatility = 0.3;
  SampledPath p = generate_path(cfg, 0);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(crossing_times(p, N).taus.size());
}
BENCHMARK(BM_CrossingTimes)->RangeMultiplier(4)->Range(4, 256);

void BM_EmbedF(benchmark::State& state) {
  PathGeneratorConfig cfg;
  cfg.step_count = 256;
  cfg.volatility = 0.3;
  SampledPath p = generate_path(cfg, 0);
  for (auto _ : state) benchmark::DoNotOptimize(embed_F(p, 64).jump_times.size());
}
BENCHMARK(BM_EmbedF);

void BM_SimulateLift(benchmark::State& state) {
  PathTree tree = make_tree(2, 2, 2);
  Rng rng(2);
  ThresholdTables thr = compute_thresholds(extract_conditionals(tree, random_tree_measure(tree, rng)));
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_lift(thr, n, 3).samples.size());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateLift)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
