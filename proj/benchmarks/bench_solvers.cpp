#include <benchmark/benchmark.h>

#include "mixmap/baselines.hpp"
#include "mixmap/factor_model.hpp"
#include "mixmap/generators.hpp"
#include "mixmap/jgraph.hpp"
#include "mixmap/mp.hpp"
#include "mixmap/oracle.hpp"
#include "mixmap/proximal.hpp"
#include "mixmap/uai.hpp"

namespace {

using namespace mixmap;

PairwiseModel hmm(benchmark::State& state) { return gen_hmm(static_cast<int>(state.range(0)), 1.0, 7); }

void BM_QForestElimination(benchmark::State& state) {
  const auto m = hmm(state);
  const QEvaluator q(m);
  const MaxConfig x(m.max_nodes().size(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(q(x));
}
BENCHMARK(BM_QForestElimination)->Arg(20)->Arg(200)->Arg(2000);

void BM_ExactMarginalMap(benchmark::State& state) {
  const auto m = hmm(state);
  for (auto _ : state) benchmark::DoNotOptimize(marginal_map_exact(m));
}
BENCHMARK(BM_ExactMarginalMap)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MixedProduct(benchmark::State& state) {
  const auto m = hmm(state);
  const std::vector<double> rho(m.num_edges(), 1.0);
  SolverOptions o;
  o.compute_residuals = false;
  o.record_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_mixed_product(m, rho, o));
}
BENCHMARK(BM_MixedProduct)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ProximalBethe(benchmark::State& state) {
  const auto m = hmm(state);
  ProximalOptions o;
  o.compute_residuals = false;
  o.record_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_proximal(m, ProximalFlavor::Bethe, o));
}
BENCHMARK(BM_ProximalBethe)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ProximalTrwGrid(benchmark::State& state) {
  const auto m = gen_grid(static_cast<int>(state.range(0)), GridPattern::SumLoopy, 1.0, 7, 2);
  ProximalOptions o;
  o.compute_residuals = false;
  o.record_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_proximal(m, ProximalFlavor::Trw, o));
}
BENCHMARK(BM_ProximalTrwGrid)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Taboo(benchmark::State& state) {
  const auto m = hmm(state);
  TabooOptions o;
  for (auto _ : state) benchmark::DoNotOptimize(run_taboo(m, o));
}
BENCHMARK(BM_Taboo)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_JunctionGraphBp(benchmark::State& state) {
  const auto fm = to_factor_model(gen_grid(static_cast<int>(state.range(0)), GridPattern::SumLoopy, 1.0, 7, 2));
  const auto jg = build_junction_graph(fm);
  SolverOptions o;
  o.record_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_mixed_jgbp(jg, o));
}
BENCHMARK(BM_JunctionGraphBp)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_ParseUai(benchmark::State& state) {
  const std::string doc = serialize_uai(to_factor_model(gen_grid(static_cast<int>(state.range(0)), GridPattern::SumLoopy, 1.0, 7)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_uai(doc));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * doc.size()));
}
BENCHMARK(BM_ParseUai)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
