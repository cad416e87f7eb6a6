#include <benchmark/benchmark.h>

#include <vector>

#include "longmat/levy_models.hpp"
#include "longmat/special_functions.hpp"

namespace {

std::vector<double> k1_arguments(double lo, double hi) {
  std::vector<double> ys(1024);
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = lo + (hi - lo) * static_cast<double>(i) / ys.size();
  return ys;
}

void BM_BesselK1(benchmark::State& state) {
  const auto ys = k1_arguments(static_cast<double>(state.range(0)) / 10.0, static_cast<double>(state.range(1)));
  for (auto _ : state) {
    for (double y : ys) benchmark::DoNotOptimize(longmat::bessel_k1(y));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ys.size()));
}
BENCHMARK(BM_BesselK1)->Args({1, 2})->Args({20, 700});

void BM_NormalTail(benchmark::State& state) {
  const auto xs = k1_arguments(0.0, 16.0);
  for (auto _ : state) {
    for (double x : xs) benchmark::DoNotOptimize(longmat::normal_tail(x - 8.0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(xs.size()));
}
BENCHMARK(BM_NormalTail);

void BM_NigDensity(benchmark::State& state) {
  const longmat::ModelParams nig = longmat::NigParams{0.0, -0.1, 1.0, 1.0, 0.0};
  const auto zs = k1_arguments(-4.0, 4.0);
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) {
    for (double z : zs) benchmark::DoNotOptimize(longmat::normalized_density(nig, t, z - 4.0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(zs.size()));
}
BENCHMARK(BM_NigDensity)->Arg(1)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
