#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "esarb/analytic_criteria.hpp"
#include "esarb/arbitrage_detector.hpp"
#include "esarb/risk_measures.hpp"
#include "esarb/scenario_models.hpp"

using namespace esarb;

namespace {

WeightedSample random_sample(std::size_t n) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    WeightedSample s;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s.values.push_back(z(rng));
        s.weights.push_back(u(rng));
        total += s.weights.back();
    }
    for (double& w : s.weights) w /= total;
    return s;
}

MarkowitzMarket two_assets() {
    MarkowitzMarket m;
    m.mu = {1.2, 1.05};
    m.sigma = {{0.04, 0.01}, {0.01, 0.02}};
    m.c = {1.0, 1.0};
    m.rf = 0.0;
    return m;
}

}  // namespace

static void BM_EsP(benchmark::State& state) {
    const auto s = random_sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(es_p(s, RiskLevel(0.05)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EsP)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity();

static void BM_DetectMarkowitz(benchmark::State& state) {
    const auto market = markowitz_scenario_market(two_assets(), static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(detect(market, RiskLevel(0.05)));
}
BENCHMARK(BM_DetectMarkowitz)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_PlQuadrature(benchmark::State& state) {
    LognormalMixture model;
    model.spot = 100.0;
    model.rate = 0.02;
    model.maturity = 1.0;
    model.weights = {0.6, 0.4};
    model.log_sds = {0.15, 0.35};
    model.log_means = {std::log(103.0) - 0.5 * 0.15 * 0.15, std::log(97.0) - 0.5 * 0.35 * 0.35};
    std::vector<double> strikes;
    for (double k = 60.0; k <= 150.0; k += 5.0) strikes.push_back(k);
    const auto grid = pl_grid(model, strikes, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(pl_quadrature(model, grid));
}
BENCHMARK(BM_PlQuadrature)->Arg(100)->Arg(1000)->Arg(10000);
BENCHMARK_MAIN();
