#include <benchmark/benchmark.h>

#include <memory>

#include "rcgff/cluster.hpp"
#include "rcgff/continuum.hpp"
#include "rcgff/dirichlet.hpp"
#include "rcgff/walk.hpp"

using namespace rcgff;

namespace {

std::shared_ptr<const ClusterGraph> exp_cluster(int side) {
  return std::make_shared<const ClusterGraph>(ClusterGraph::largest_component(
      ConductanceField::generate(LawSpec::exponential(1.0), {side, side}, 7)));
}

void BM_Generate(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ConductanceField::generate(LawSpec::exponential(1.0), {side, side}, 7));
  state.SetItemsProcessed(state.iterations() * 2 * side * side);
}
BENCHMARK(BM_Generate)->Arg(128)->Arg(512);

void BM_LargestComponent(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto f = ConductanceField::generate(LawSpec::bernoulli(0.7), {side, side}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(ClusterGraph::largest_component(f));
}
BENCHMARK(BM_LargestComponent)->Arg(256);

void BM_GreenColumnPcg(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto sys = DirichletSystem::assemble(
      exp_cluster(side), LatticeBox{{1, 1}, {side - 2, side - 2}});
  SolverOptions opts;
  opts.dense_fallback_cap = 0;
  const Site y{side / 2, side / 2};
  for (auto _ : state) benchmark::DoNotOptimize(green_column(sys, y, opts));
}
BENCHMARK(BM_GreenColumnPcg)->Arg(66)->Arg(130)->Unit(benchmark::kMillisecond);

void BM_SampleDgff(benchmark::State& state) {
  const auto sys = DirichletSystem::assemble(exp_cluster(66), LatticeBox{{1, 1}, {64, 64}});
  for (auto _ : state) benchmark::DoNotOptimize(sample_dgff(sys, 100, 3));
}
BENCHMARK(BM_SampleDgff)->Unit(benchmark::kMillisecond);

void BM_WalkJumps(benchmark::State& state) {
  const auto cg = exp_cluster(200);
  const Site x0{100, 100};
  std::uint64_t rep = 0;
  std::size_t jumps = 0;
  for (auto _ : state) {
    const auto t = simulate(*cg, x0, 1000.0, 5, rep++);
    jumps += t.times.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(jumps));
}
BENCHMARK(BM_WalkJumps);

void BM_GreenRectangleSeries(benchmark::State& state) {
  const auto spec = ContinuumGreenSpec::isotropic(unit_cube(2), 2.0);
  const std::vector<double> x{0.25, 0.5}, y{0.75, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(green(spec, x, y));
}
BENCHMARK(BM_GreenRectangleSeries);

}  // namespace

BENCHMARK_MAIN();
