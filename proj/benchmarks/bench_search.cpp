// Microbenchmarks for the coupled dual searches and full variant solvers.

#include <benchmark/benchmark.h>

#include <vector>

#include "fhbandit/budgeted.hpp"
#include "fhbandit/delayed.hpp"
#include "fhbandit/lagrangian.hpp"
#include "fhbandit/maxmab.hpp"
#include "fhbandit/statespace.hpp"
#include "fhbandit/switching.hpp"

using namespace fhbandit;

namespace {

std::vector<ArmModel> ladder(int horizon, int delay = 0) {
    std::vector<ArmModel> arms;
    for (int j = 1; j <= 5; ++j) {
        arms.push_back(build_beta_bernoulli(1, j, horizon));
        arms.back().delay = delay;
    }
    return arms;
}

} // namespace

static void BM_BaseSearch(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms = ladder(T);
    for (auto _ : state) {
        auto sol = coupled_lagrangian_search<SingleArmPolicy>(
            make_base_oracle(arms), static_cast<int>(arms.size()),
            static_cast<double>(T), 0.05);
        benchmark::DoNotOptimize(sol.dual_bound);
    }
}
BENCHMARK(BM_BaseSearch)->Arg(10)->Arg(30);

static void BM_SolveDelayedSmall(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms = ladder(T, 1);
    for (auto _ : state) {
        DelayedSolution sol = solve_delayed(arms, 1, T, 0.05, DelayRegime::Small);
        benchmark::DoNotOptimize(sol.dual_bound);
    }
}
BENCHMARK(BM_SolveDelayedSmall)->Arg(100);

static void BM_SolveMaxMab(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms;
    for (int j = 1; j <= 4; ++j) arms.push_back(build_beta_bernoulli(1, j, T));
    for (auto _ : state) {
        LambdaSolution sol = solve_maxmab(arms, 2, T, 0.05);
        benchmark::DoNotOptimize(sol.dual_bound);
    }
}
BENCHMARK(BM_SolveMaxMab)->Arg(10)->Arg(20);

static void BM_BalanceLambda(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms = ladder(T);
    for (auto _ : state) {
        BudgetedSolution sol = balance_lambda(arms, T, 1e-3);
        benchmark::DoNotOptimize(sol.dual_bound);
    }
}
BENCHMARK(BM_BalanceLambda)->Arg(10)->Arg(20);

static void BM_Orienteering(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    MetricSpec m;
    m.distances.assign(static_cast<std::size_t>(n),
                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                m.distances[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    0.1 + 0.01 * static_cast<double>((i * 7 + j * 3) % 13);
    // Symmetrize and keep the triangle inequality by flattening to max 0.2.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = std::min(m.distances[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 0.2);
            m.distances[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d;
            m.distances[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d;
        }
    m.start = 0;
    m.travel_budget = 0.8;
    std::vector<double> rewards;
    for (int i = 0; i < n; ++i) rewards.push_back(1.0 + 0.1 * static_cast<double>(i));
    for (auto _ : state) {
        OrienteeringResult r = orienteering_exact(m, rewards);
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(BM_Orienteering)->Arg(8)->Arg(12)->Arg(16);

BENCHMARK_MAIN();
