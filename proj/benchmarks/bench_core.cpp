#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "codim/solver.hpp"
#include "codim/walker.hpp"

namespace codim {
namespace {

BoundarySet sine_curve() { return BoundarySet::graph(3, std::make_shared<SinusoidalGraph>(1, 2, 0.1, 2.0)); }

void BM_ProjectGraph(benchmark::State& state) {
  const BoundarySet b = sine_curve();
  double s = 0.0;
  for (auto _ : state) {
    s += 0.001;
    benchmark::DoNotOptimize(project(b, Vec{0.3 + s, 0.2, 0.4}));
  }
}
BENCHMARK(BM_ProjectGraph);

void BM_SmoothedGradientFlat(benchmark::State& state) {
  const BoundarySet b = BoundarySet::flat(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(smoothed_distance_gradient(b, Vec{0.1, 0.2, 0.3}, 1.0));
}
BENCHMARK(BM_SmoothedGradientFlat);

void BM_SmoothedGradientGraphFast(benchmark::State& state) {
  const BoundarySet b = sine_curve();
  for (auto _ : state) benchmark::DoNotOptimize(smoothed_distance_gradient(b, Vec{0.1, 0.2, 0.3}, 1.0, true));
}
BENCHMARK(BM_SmoothedGradientGraphFast);

// One operator application on the flat grid at spacing 1/state.range(0).
void BM_OperatorApply(benchmark::State& state) {
  const BoundarySet b = BoundarySet::flat(3, 1);
  auto g = std::make_shared<GridDomain>(b, GridSpec{2.0, 1.0 / static_cast<double>(state.range(0)), 0.0});
  const LinearSystem sys(g, build_weight(g, WeightVariant::Smoothed, 1.0));
  std::vector<double> x(g->size(), 1.0), y(g->size());
  for (auto _ : state) {
    sys.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g->size()));
}
BENCHMARK(BM_OperatorApply)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_WalkerPathsFlat(benchmark::State& state) {
  const BoundarySet b = BoundarySet::flat(3, 1);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_paths(b, Vec{0.0, 0.0, 1.0}, 100, seed++));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_WalkerPathsFlat)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace codim

BENCHMARK_MAIN();
