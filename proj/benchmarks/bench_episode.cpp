// Microbenchmarks for the Monte Carlo executors: single-episode cost of each
// scheduler and the threaded estimator's end-to-end throughput.

#include <benchmark/benchmark.h>

#include <vector>

#include "fhbandit/delayed.hpp"
#include "fhbandit/lagrangian.hpp"
#include "fhbandit/maxmab.hpp"
#include "fhbandit/scheduler.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/statespace.hpp"

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

static void BM_RunCombined(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms = ladder(T);
    auto sol = coupled_lagrangian_search<SingleArmPolicy>(
        make_base_oracle(arms), static_cast<int>(arms.size()),
        static_cast<double>(T), 0.05);
    ScheduleConfig cfg;
    cfg.plays_per_slot = 1;
    cfg.horizon = T;
    cfg.given_order = ranked_order(arms, sol.policies);
    std::uint64_t ep = 0;
    for (auto _ : state) {
        EpisodeResult r = run_combined(arms, sol.policies, cfg, 1, ep++);
        benchmark::DoNotOptimize(r.total_reward);
    }
}
BENCHMARK(BM_RunCombined)->Arg(10)->Arg(30);

static void BM_RunDelayed(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms = ladder(T, 1);
    DelayedSolution sol = solve_delayed(arms, 1, T, 0.05, DelayRegime::Small);
    DelayedRunConfig cfg{1, T, sol.alpha, sol.order};
    std::uint64_t ep = 0;
    for (auto _ : state) {
        EpisodeResult r = run_delayed(arms, sol.run_policies, cfg, 1, ep++);
        benchmark::DoNotOptimize(r.total_reward);
    }
}
BENCHMARK(BM_RunDelayed)->Arg(100);

static void BM_RunThrottled(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    std::vector<ArmModel> arms;
    for (int j = 1; j <= 4; ++j) arms.push_back(build_beta_bernoulli(1, j, T));
    TruncatedMaxMabSolution sol =
        solve_maxmab_truncated(arms, 2, T, 0.05, kThrottleAlpha, kThrottleBeta);
    std::uint64_t ep = 0;
    for (auto _ : state) {
        EpisodeResult r = run_throttled(arms, sol, T, 1, ep++);
        benchmark::DoNotOptimize(r.total_reward);
    }
}
BENCHMARK(BM_RunThrottled)->Arg(10)->Arg(20);

static void BM_EstimateThroughput(benchmark::State& state) {
    const int T = 10;
    std::vector<ArmModel> arms = ladder(T);
    auto sol = coupled_lagrangian_search<SingleArmPolicy>(
        make_base_oracle(arms), static_cast<int>(arms.size()),
        static_cast<double>(T), 0.05);
    ScheduleConfig cfg;
    cfg.plays_per_slot = 1;
    cfg.horizon = T;
    cfg.given_order = ranked_order(arms, sol.policies);
    const std::uint64_t episodes = 10000;
    for (auto _ : state) {
        Estimate est = estimate_reward(
            [&](std::uint64_t ep) {
                return run_combined(arms, sol.policies, cfg, 2, ep).total_reward;
            },
            episodes, 2, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(est.mean);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(episodes));
}
BENCHMARK(BM_EstimateThroughput)->Arg(1)->Arg(4)->UseRealTime();

BENCHMARK_MAIN();
