#include <benchmark/benchmark.h>

#include <vector>

#include "viseq/behavior.hpp"
#include "viseq/game.hpp"
#include "viseq/pipeline.hpp"
#include "viseq/rng.hpp"
#include "viseq/solver.hpp"
#include "viseq/stats.hpp"

using namespace viseq;

namespace {

ResponseMap fitted_map(VisType vis) {
  SignalScheme scheme;
  if (vis == VisType::Hops) scheme.variant = SignalScheme::Variant::FrameSequence;
  return ResponseMap::from_population(
      normalized_mixture({{AgentModel{EmpiricalLogistic{}}, 1.0}}), CongestionGame{}, scheme,
      InformationAccess::Public);
}

void BM_Bisection(benchmark::State& state) {
  const ResponseMap map = fitted_map(VisType::Bar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bisection(map, 1e-9).p_star);
  }
}
BENCHMARK(BM_Bisection);

void BM_GridScan(benchmark::State& state) {
  const ResponseMap map = fitted_map(VisType::Bar);
  const double resolution = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_scan(map, resolution).p_star);
  }
}
BENCHMARK(BM_GridScan)->Arg(1000)->Arg(10000);

void BM_BinomCdf(benchmark::State& state) {
  double acc = 0.0;
  for (auto _ : state) {
    for (int k = 0; k <= 30; ++k) acc += binom_cdf(k, {30, 0.37});
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_BinomCdf);

void BM_FrameAggregate(benchmark::State& state) {
  const PopulationMixture pop = default_population(InformationAccess::Public, VisType::Hops);
  SignalScheme scheme;
  scheme.variant = SignalScheme::Variant::FrameSequence;
  MonteCarloConfig mc;
  mc.draws = static_cast<int>(state.range(0));
  mc.seed = 11;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        aggregate_response(pop, CongestionGame{}, scheme, 0.3, InformationAccess::Public, mc)
            .mean);
  }
}
BENCHMARK(BM_FrameAggregate)->Arg(1000)->Arg(10000);

void BM_Bootstrap(benchmark::State& state) {
  RngStream rng(12);
  std::vector<int> choices;
  for (int i = 0; i < 900; ++i) choices.push_back(rng.bernoulli(0.3) ? 1 : 0);
  BootstrapConfig cfg;
  cfg.seed = 13;
  cfg.group_size = 30;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_proportion(choices, cfg).estimate);
  }
}
BENCHMARK(BM_Bootstrap);

void BM_LogisticFit(benchmark::State& state) {
  RngStream rng(14);
  DesignMatrix d({"intercept", "x", "z"});
  std::vector<int> y;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = rng.uniform() * 2.0 - 1.0;
    const double z = rng.bernoulli(0.5) ? 1.0 : 0.0;
    d.add_row({1.0, x, z});
    y.push_back(rng.bernoulli(logistic(0.3 + 0.8 * x - 0.4 * z)) ? 1 : 0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(logistic_fit(d, y).coefficients[0]);
  }
}
BENCHMARK(BM_LogisticFit)->Arg(10000);

void BM_Simulate(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.participants = static_cast<int>(state.range(0));
  cfg.seed = 15;
  cfg.threads = static_cast<int>(state.range(1));
  const PopulationSpec pop = default_population_spec();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_experiment(cfg, pop, CongestionGame{}, SchemeSpec{}).size());
  }
}
BENCHMARK(BM_Simulate)->Args({200, 1})->Args({200, 4});

void BM_RobbinsMonro(benchmark::State& state) {
  const ResponseMap map = ResponseMap::from_population(
      normalized_mixture({{AgentModel{LogitResponder{0.1}}, 1.0}}), CongestionGame{},
      SignalScheme{SignalScheme::Variant::BinomialSample, 30, 30}, InformationAccess::Public);
  RobbinsMonroConfig cfg;
  cfg.iterations = state.range(0);
  cfg.seed = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robbins_monro(map, cfg).p_star);
  }
}
BENCHMARK(BM_RobbinsMonro)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
