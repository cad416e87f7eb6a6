#include <benchmark/benchmark.h>

#include <vector>

#include "longmat/mc_engine.hpp"
#include "longmat/rng.hpp"

namespace {

const longmat::ModelParams kModels[] = {
    longmat::BrownianParams{0.0, 0.2, -0.02},
    longmat::NigParams{0.0, -0.1, 1.0, 1.0, 0.0},
    longmat::VarianceGammaParams{0.0, 0.2, -0.1, 0.0, 0.5},
};

void BM_PhiloxUniform(benchmark::State& state) {
  longmat::RandomStream rng(7, 0, longmat::StreamDomain::window);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxUniform);

void BM_PhiloxNormal(benchmark::State& state) {
  longmat::RandomStream rng(7, 0, longmat::StreamDomain::window);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

void BM_MarginalDraw(benchmark::State& state) {
  const auto& model = kModels[state.range(0)];
  std::uint64_t path = 0;
  for (auto _ : state) {
    longmat::RandomStream rng(7, path++, longmat::StreamDomain::marginal);
    benchmark::DoNotOptimize(longmat::sample_marginal(model, 40.0, rng));
  }
  state.SetLabel(std::string(longmat::to_string(model.kind())));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MarginalDraw)->DenseRange(0, 2);

void BM_WindowPath(benchmark::State& state) {
  const auto& model = kModels[state.range(0)];
  const int steps = static_cast<int>(state.range(1));
  std::uint64_t path = 0;
  for (auto _ : state) {
    longmat::RandomStream rng(7, path++, longmat::StreamDomain::window);
    benchmark::DoNotOptimize(longmat::sample_window_path(model, 0.0, 1.0, steps, rng));
  }
  state.SetLabel(std::string(longmat::to_string(model.kind())));
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(state.iterations()) * steps,
                                                 benchmark::Counter::kIsRate);
}
BENCHMARK(BM_WindowPath)->ArgsProduct({{0, 1, 2}, {252, 1008}});

}  // namespace

BENCHMARK_MAIN();
