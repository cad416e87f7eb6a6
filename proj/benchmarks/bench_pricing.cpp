#include <benchmark/benchmark.h>

#include <vector>

#include "longmat/asymptotics.hpp"
#include "longmat/mc_engine.hpp"
#include "longmat/pricing.hpp"

namespace {

const longmat::ModelParams kDesk = longmat::BrownianParams{0.0, 0.2, -0.02};
const longmat::ModelParams kNig = longmat::NigParams{0.0, -0.1, 1.0, 1.0, 0.0};

longmat::PayoffPair desk_pair() {
  return longmat::PayoffPair(longmat::DiscreteAsian{{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, 1.0},
                             longmat::VanillaBasket{{1.0, 1.0, 1.0, 1.0}});
}

void BM_VanillaQuadrature(benchmark::State& state) {
  const auto& model = state.range(0) == 0 ? kDesk : kNig;
  for (auto _ : state) benchmark::DoNotOptimize(longmat::vanilla_price_quadrature(model, 20.0, 1.0).value);
  state.SetLabel(std::string(longmat::to_string(model.kind())));
}
BENCHMARK(BM_VanillaQuadrature)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ApproxPriceTilde(benchmark::State& state) {
  const auto pair = desk_pair();
  for (auto _ : state) benchmark::DoNotOptimize(longmat::approx_price_tilde(kNig, pair, 40.0, 1.0).value);
}
BENCHMARK(BM_ApproxPriceTilde)->Unit(benchmark::kMicrosecond);

void BM_EpsilonCurve(benchmark::State& state) {
  const auto pair = desk_pair();
  longmat::QuadratureConfig quad;
  quad.n_paths = static_cast<std::size_t>(state.range(0));
  quad.window_steps = 252;
  for (auto _ : state) benchmark::DoNotOptimize(longmat::error_constant(kDesk, pair, 1.0, quad, 7).value);
  state.counters["paths/s"] =
      benchmark::Counter(static_cast<double>(state.iterations() * state.range(0)), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EpsilonCurve)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_McPair(benchmark::State& state) {
  const auto pair = desk_pair();
  const longmat::SimPlan plan{kDesk, 40.0, 1.0, 252, static_cast<std::size_t>(state.range(0)), 7};
  for (auto _ : state) benchmark::DoNotOptimize(longmat::mc_price(plan, pair).difference.value);
  state.counters["paths/s"] =
      benchmark::Counter(static_cast<double>(state.iterations() * state.range(0)), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_McPair)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
