#include <benchmark/benchmark.h>

#include <vector>

#include "oligo_rd/analysis.hpp"
#include "oligo_rd/dynamics.hpp"
#include "oligo_rd/equilibrium.hpp"
#include "oligo_rd/reactions.hpp"
#include "oligo_rd/steadystate.hpp"

using namespace oligo_rd;

namespace {

ModelSpec linear_model(int n = 2) {
  ModelSpec spec;
  spec.params = {n, 0.1, 0.2};
  spec.demand = LinearSubstitutes{2.0, 0.5};
  return spec;
}

ModelSpec power_model() {
  ModelSpec spec = linear_model();
  spec.demand = PowerInverse{2.0, 0.5, 2.0};
  return spec;
}

void BM_BertrandStatic(benchmark::State& state) {
  const auto spec = state.range(0) ? power_model() : linear_model();
  for (auto _ : state) benchmark::DoNotOptimize(bertrand_static(spec, 0.5));
}
BENCHMARK(BM_BertrandStatic)->Arg(0)->Arg(1);

void BM_CournotStatic(benchmark::State& state) {
  const auto spec = state.range(0) ? power_model() : linear_model();
  for (auto _ : state) benchmark::DoNotOptimize(cournot_static(spec, 0.5));
}
BENCHMARK(BM_CournotStatic)->Arg(0)->Arg(1);

void BM_PriceReaction(benchmark::State& state) {
  const auto spec = linear_model(static_cast<int>(state.range(0)));
  const auto eq = bertrand_static(spec, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(price_reaction(spec, eq.point));
}
BENCHMARK(BM_PriceReaction)->Arg(2)->Arg(8);

void BM_KGivenM(benchmark::State& state) {
  auto spec = linear_model();
  spec.tech.alpha = 0.6;
  const auto mode = static_cast<Mode>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(k_given_m(spec, Regime::Cournot, mode, 1.0));
}
BENCHMARK(BM_KGivenM)->Arg(0)->Arg(1)->Arg(2);

void BM_JointSteadyState(benchmark::State& state) {
  const auto spec = linear_model();
  const SteadyStateOptions options{static_cast<int>(state.range(0)), 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_steady_state(spec, Regime::Bertrand, Mode::OpenLoop, options));
  }
}
BENCHMARK(BM_JointSteadyState)->Arg(200)->Arg(1000);

void BM_Integrate(benchmark::State& state) {
  auto spec = linear_model(static_cast<int>(state.range(0)));
  spec.tech.beta = 0.2;
  const std::vector<double> m0(spec.params.n, 1.0);
  const ConstantK policy{{0.15}};
  for (auto _ : state) benchmark::DoNotOptimize(integrate(spec, policy, m0, 50.0, 0.01));
}
BENCHMARK(BM_Integrate)->Arg(2)->Arg(10);

void BM_Sweep(benchmark::State& state) {
  SweepGrid grid;
  grid.n = std::vector<int>{2, 3, 4, 6};
  grid.s = std::vector<double>{0.2, 0.5, 0.8};
  grid.modes = {Mode::OpenLoop, Mode::ClosedLoop};
  const SweepOptions options{static_cast<unsigned>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(linear_model(), grid, options));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
