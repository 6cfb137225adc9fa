// Microbenchmarks for the per-arm dynamic programs: state-space construction,
// the play/stop gain DP, and its block, budgeted, and max-reward variants.

#include <benchmark/benchmark.h>

#include "fhbandit/budgeted.hpp"
#include "fhbandit/delayed.hpp"
#include "fhbandit/lagrangian.hpp"
#include "fhbandit/maxmab.hpp"
#include "fhbandit/statespace.hpp"

using namespace fhbandit;

static void BM_BuildBetaSpace(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    for (auto _ : state) {
        ArmModel m = build_beta_bernoulli(1, 1, T);
        benchmark::DoNotOptimize(m.num_states());
    }
}
BENCHMARK(BM_BuildBetaSpace)->Arg(20)->Arg(50)->Arg(100);

static void BM_GainDp(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    ArmModel m = build_beta_bernoulli(1, 1, T);
    for (auto _ : state) {
        GainResult r = gain_dp(m, 0.3);
        benchmark::DoNotOptimize(r.q);
    }
}
BENCHMARK(BM_GainDp)->Arg(20)->Arg(50)->Arg(100);

static void BM_BlockGainDp(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    ArmModel m = build_beta_bernoulli(1, 1, T);
    BlockModel bm = block_model(m, 1, T);
    for (auto _ : state) {
        BlockGainResult r = block_gain_dp(bm, 0.3);
        benchmark::DoNotOptimize(r.q);
    }
}
BENCHMARK(BM_BlockGainDp)->Arg(20)->Arg(50)->Arg(100);

static void BM_BudgetedGainDp(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    ArmModel m = build_beta_bernoulli(1, 1, T);
    for (auto _ : state) {
        BudgetedGainResult r = budgeted_gain_dp(m, 0.3, T);
        benchmark::DoNotOptimize(r.q);
    }
}
BENCHMARK(BM_BudgetedGainDp)->Arg(20)->Arg(50);

static void BM_MaxMabGainDp(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    ArmModel m = build_beta_bernoulli(1, 1, T);
    for (auto _ : state) {
        MaxMabGainResult r = maxmab_gain_dp(m, 0.3, 2);
        benchmark::DoNotOptimize(r.q);
    }
}
BENCHMARK(BM_MaxMabGainDp)->Arg(20)->Arg(50);

static void BM_GittinsIndex(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    ArmModel m = build_beta_bernoulli(1, 1, T);
    for (auto _ : state) {
        double g = gittins_index(m, m.root);
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(BM_GittinsIndex)->Arg(20)->Arg(50);

BENCHMARK_MAIN();
