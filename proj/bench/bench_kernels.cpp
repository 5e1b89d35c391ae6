// Serial reference against the OpenMP kernels on the same inputs.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "commute/bracket.hpp"
#include "commute/collapse_map.hpp"
#include "commute/evaluation_map.hpp"

using namespace commute;

namespace {

std::vector<GridField> sine_pair(int res) {
  const TorusDomain d = TorusDomain::uniform(2, res);
  return {sample_field(d, "sin(2πx)"), sample_field(d, "sin(2πy)")};
}

template <GridField (*Bracket)(std::span<const GridField>)> void BM_Bracket(benchmark::State& state) {
  const auto f = sine_pair(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(Bracket(f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f[0].size()));
}

template <double (*Norm)(const GridField&)> void BM_L1(benchmark::State& state) {
  const auto f = sine_pair(static_cast<int>(state.range(0)));
  const GridField b = bracket(f);
  for (auto _ : state)
    benchmark::DoNotOptimize(Norm(b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.size()));
}

template <VoxelSet (*Voxelize)(const EvaluationSample&, double, int)> void BM_Voxelize(benchmark::State& state) {
  const auto f = sine_pair(static_cast<int>(state.range(0)));
  const EvaluationSample s = evaluate_map(f, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(Voxelize(s, 1.0 / 256, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}

template <std::vector<double> (*Eval)(const CollapseMap&, std::span<const double>)>
void BM_Collapse(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coord(0, 63);
  std::vector<VoxelSet::Index> idx;
  for (int i = 0; i < 200; ++i)
    idx.push_back({coord(rng), coord(rng), 0});
  const VoxelSet k(2, 1.0 / 64, {0.0, 0.0}, idx);
  const CollapseMap map = build_collapse_map(k);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pts(2 * static_cast<std::size_t>(state.range(0)));
  for (double& v : pts)
    v = u(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(Eval(map, pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_Bracket<serial::bracket>)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Bracket<parallel::bracket>)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_L1<serial::l1_norm>)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_L1<parallel::l1_norm>)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Voxelize<serial::voxelize_image>)->Arg(512)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Voxelize<parallel::voxelize_image>)->Arg(512)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Collapse<serial::evaluate_collapse>)->Arg(1 << 16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Collapse<parallel::evaluate_collapse>)->Arg(1 << 16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
