#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "fhbandit/maxmab.hpp"
#include "fhbandit/oracle.hpp"
#include "fhbandit/sim.hpp"
#include "helpers.hpp"

using namespace fhbandit;
using fhtest::bernoulli_arm;
using fhtest::known_arm;

namespace {

// Play everywhere with one fixed choice threshold.
SingleArmPolicy play_with_threshold(const ArmModel& m, double tau) {
    SingleArmPolicy p = SingleArmPolicy::all_stop(m);
    for (StateId u = 0; u < m.num_states(); ++u) {
        if (!m.state(u).playable) continue;
        p.act[static_cast<std::size_t>(u)] = ArmAction::Play;
        p.choose_min_value[static_cast<std::size_t>(u)] = tau;
    }
    return p;
}

TruncatedMaxMabSolution fixed_solution(const std::vector<ArmModel>& arms,
                                       const std::vector<double>& thresholds, int K) {
    TruncatedMaxMabSolution sol;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        sol.policies.push_back(
            MixedArmPolicy::pure(play_with_threshold(arms[i], thresholds[i])));
        sol.branch_lambda1.push_back({0.0});
    }
    sol.alpha = 1.0;
    sol.beta = 1.0;
    sol.plays_per_slot = K;
    sol.max_plays = arms.empty() ? 0 : arms[0].horizon;
    return sol;
}

std::map<int, std::vector<const PlayRecord*>> by_slot(const EpisodeResult& ep) {
    std::map<int, std::vector<const PlayRecord*>> slots;
    for (const PlayRecord& r : ep.trace) slots[r.slot].push_back(&r);
    return slots;
}

} // namespace

TEST_SUITE("maxmab") {

TEST_CASE("gain DP hand values") {
    // Fair coin on {0,1}, one playable state, lambda 0.2, K = 1:
    //   0.5 * (1 - 0.2) - 0.2 = 0.2.
    ArmModel coin = bernoulli_arm(0.5, 1);
    MaxMabGainResult r = maxmab_gain_dp(coin, 0.2, 1);
    CHECK(r.q == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r.policy.action(coin.root) == ArmAction::Play);
    CHECK(r.policy.threshold(coin.root) == 1.0);  // smallest support above 0.2

    // lambda at or above the whole support stops immediately.
    MaxMabGainResult stop = maxmab_gain_dp(coin, 1.0, 1);
    CHECK(stop.q == 0.0);
    CHECK(stop.policy.action(coin.root) == ArmAction::Stop);

    // Beta(1,1), T = 2, lambda 0.3, K = 1: the failure child goes negative
    // ((1/3)(0.7) - 0.3 < 0) and drops out, the success child keeps playing:
    //   root = (0.35 - 0.3) + (1/2)(2/3 * 0.7 - 0.3) = 1/20 + 1/12 = 2/15.
    ArmModel beta = build_beta_bernoulli(1, 1, 2);
    MaxMabGainResult two = maxmab_gain_dp(beta, 0.3, 1);
    CHECK(two.q == doctest::Approx(2.0 / 15.0).epsilon(1e-12));
    const StateId up = beta.child_on(beta.root, 1.0);
    const StateId down = beta.child_on(beta.root, 0.0);
    CHECK(two.policy.action(up) == ArmAction::Play);
    CHECK(two.policy.action(down) == ArmAction::Stop);

    // A larger K prices plays more cheaply, so the gain can only grow.
    CHECK(maxmab_gain_dp(beta, 0.3, 2).q >= two.q - 1e-12);
}

TEST_CASE("gain DP satisfies the dual identity on random models") {
    std::mt19937_64 g(606);
    for (int it = 0; it < 40; ++it) {
        ArmModel m = (it % 2 == 0) ? fhtest::random_model(g, 4)
                                   : fhtest::random_multivalue_model(g, 4);
        const int K = 1 + static_cast<int>(g() % 3);
        std::uniform_real_distribution<double> lam(0.0, 1.0);
        const double lambda = lam(g);
        MaxMabGainResult r = maxmab_gain_dp(m, lambda, K);
        PolicyStats st = policy_stats(m, r.policy);
        const double forward = (st.choice_value - lambda * st.choice_total()) -
                               lambda / static_cast<double>(K) * st.plays;
        CAPTURE(it);
        CAPTURE(lambda);
        CHECK(r.q == doctest::Approx(forward).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("coupled search on degenerate instances") {
    // A deterministic value-1 arm plays and chooses every slot: consumption
    // T + T/K = 2T meets the target exactly, so lambda stays 0.
    LambdaSolution det = solve_maxmab({known_arm(1.0, 4)}, 1, 4, 0.05);
    CHECK_FALSE(det.searched);
    CHECK(det.a == 1.0);
    CHECK(det.dual_bound == doctest::Approx(4.0).epsilon(1e-12));

    LambdaSolution nil = solve_maxmab({known_arm(0.0, 3)}, 1, 3, 0.05);
    CHECK(nil.dual_bound == 0.0);
}

TEST_CASE("exact max oracle hand values") {
    std::vector<ArmModel> coins = {bernoulli_arm(0.5, 2), bernoulli_arm(0.5, 2)};
    // K = 1 collapses to the additive game.
    CHECK(exact_maxmab_opt(coins, 1, 2) ==
          doctest::Approx(exact_joint_opt(coins, 1, 2)).epsilon(1e-12));
    // K = 2, T = 1: play both coins, score the max: 1 - 1/4.
    CHECK(exact_maxmab_opt(coins, 2, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("dual bound dominates the exact optimum at K = 1") {
    std::mt19937_64 g(607);
    for (int it = 0; it < 5; ++it) {
        std::vector<ArmModel> arms = {fhtest::random_model(g, 3), fhtest::random_model(g, 3)};
        int T = std::min(3, std::min(arms[0].horizon, arms[1].horizon));
        LambdaSolution sol = solve_maxmab(arms, 1, T, 0.05);
        CAPTURE(it);
        CHECK(sol.dual_bound >= exact_maxmab_opt(arms, 1, T) - 1e-9);
    }
}

TEST_CASE("sequential executor: first choice ends the slot") {
    std::vector<ArmModel> arms = {known_arm(1.0, 3), known_arm(0.6, 3)};
    std::vector<MixedArmPolicy> pols = {
        MixedArmPolicy::pure(play_with_threshold(arms[0], 1.0)),
        MixedArmPolicy::pure(play_with_threshold(arms[1], 0.6))};
    MaxMabRunConfig cfg;
    cfg.plays_per_slot = 2;
    cfg.horizon = 3;
    cfg.alpha = 1.0;
    EpisodeResult ep = run_maxmab_sequential(arms, pols, cfg, 3, 0);
    // The ratio order puts the value-1 arm first; its choice ends every slot.
    CHECK(ep.total_reward == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ep.plays_per_arm == std::vector<long>{3, 0});
}

TEST_CASE("sequential executor scores the slot maximum, not the trigger") {
    // Coin first (ratio 1/2 vs 2/5): heads is chosen for 1; tails passes to
    // the 0.6 arm whose choice closes the slot at max(0, 0.6).
    std::vector<ArmModel> arms = {bernoulli_arm(0.5, 3), known_arm(0.6, 3)};
    std::vector<MixedArmPolicy> pols = {
        MixedArmPolicy::pure(play_with_threshold(arms[0], 1.0)),
        MixedArmPolicy::pure(play_with_threshold(arms[1], 0.6))};
    MaxMabRunConfig cfg;
    cfg.plays_per_slot = 2;
    cfg.horizon = 3;
    cfg.alpha = 1.0;

    auto runner = [&](std::uint64_t ep) {
        return run_maxmab_sequential(arms, pols, cfg, 101, ep).total_reward;
    };
    Estimate est = estimate_reward(runner, 20000, 101);
    CHECK(std::abs(est.mean - 2.4) <= 3.0 * est.stderr_);  // 3 * (0.5 + 0.3)

    // Per-episode audit: every scored slot pays the maximum observed value.
    for (std::uint64_t e = 0; e < 200; ++e) {
        EpisodeResult ep = run_maxmab_sequential(arms, pols, cfg, 101, e);
        double expect = 0.0;
        for (const auto& [slot, recs] : by_slot(ep)) {
            double mx = 0.0;
            bool triggered = false;
            for (const PlayRecord* r : recs) {
                mx = std::max(mx, r->value);
                if (r->arm == 0 && r->value >= 1.0) triggered = true;
                if (r->arm == 1 && r->value >= 0.6) triggered = true;
            }
            if (triggered) expect += mx;
        }
        CAPTURE(e);
        CHECK(ep.total_reward == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("throttled executor plays the full set when choice mass is low") {
    std::vector<ArmModel> arms = {bernoulli_arm(0.2, 4), bernoulli_arm(0.3, 4)};
    TruncatedMaxMabSolution sol = fixed_solution(arms, {1.0, 1.0}, 2);
    EpisodeResult ep = run_throttled(arms, sol, 4, 11, 0);
    CHECK(ep.plays_per_arm == std::vector<long>{4, 4});
    for (const auto& [slot, recs] : by_slot(ep)) CHECK(recs.size() == 2);
}

TEST_CASE("throttled executor stalls on a hot arm even when the total fits") {
    std::vector<ArmModel> arms = {bernoulli_arm(0.4, 4), bernoulli_arm(0.1, 4)};
    TruncatedMaxMabSolution sol = fixed_solution(arms, {1.0, 1.0}, 2);
    EpisodeResult ep = run_throttled(arms, sol, 4, 11, 0);
    CHECK(ep.plays_per_arm == std::vector<long>{4, 0});
    for (const auto& [slot, recs] : by_slot(ep)) {
        CHECK(recs.size() == 1);
        CHECK(recs[0]->arm == 0);
    }
}

TEST_CASE("throttled executor trims an over-full set to the window") {
    std::vector<ArmModel> arms = {bernoulli_arm(0.3, 4), bernoulli_arm(0.3, 4),
                                  bernoulli_arm(0.3, 4)};
    TruncatedMaxMabSolution sol = fixed_solution(arms, {1.0, 1.0, 1.0}, 3);
    EpisodeResult ep = run_throttled(arms, sol, 4, 11, 0);
    // Greedy prefix: 0.3 < 1/3, 0.6 lands in [1/3, 2/3]; the third arm waits.
    CHECK(ep.plays_per_arm == std::vector<long>{4, 4, 0});
    for (const auto& [slot, recs] : by_slot(ep)) CHECK(recs.size() == 2);
}

TEST_CASE("truncated solver respects both consumption budgets") {
    std::vector<ArmModel> arms = {build_beta_bernoulli(1, 1, 6), bernoulli_arm(0.7, 6),
                                  build_beta_bernoulli(1, 2, 6), bernoulli_arm(0.4, 6)};
    const int K = 2;
    const int T = 6;
    TruncatedMaxMabSolution sol =
        solve_maxmab_truncated(arms, K, T, 0.05, kThrottleAlpha, kThrottleBeta);
    CHECK(sol.max_plays == std::max(1, static_cast<int>(std::floor(kThrottleBeta * T))));
    CHECK(sol.plays_consumption <=
          kThrottleAlpha * static_cast<double>(K) * static_cast<double>(T) + 1e-9);
    CHECK(sol.choice_consumption <=
          kThrottleAlpha * kThrottleBeta * static_cast<double>(T) + 1e-9);
    for (std::size_t i = 0; i < arms.size(); ++i) {
        CHECK(sol.policies[i].branches.size() <= 4);
        CHECK(sol.policies[i].branches.size() == sol.branch_lambda1[i].size());
    }

    // beta = 1/2 halves the per-arm play cap, visible in every episode.
    TruncatedMaxMabSolution half = solve_maxmab_truncated(arms, K, T, 0.05, 1.0, 0.5);
    CHECK(half.max_plays == 3);
    for (std::uint64_t e = 0; e < 100; ++e) {
        EpisodeResult ep = run_throttled(arms, half, T, 19, e);
        for (long plays : ep.plays_per_arm) CHECK(plays <= half.max_plays);
    }
}

TEST_CASE("only-max reduction thresholds and validation") {
    MixturePrior prior;
    prior.values = {1.0, 2.0, 4.0};
    prior.components = {{0.5, {0.6, 0.3, 0.1}}, {0.5, {0.2, 0.4, 0.4}}};
    ArmModel m = build_mixture(prior, 2);

    OnlyMaxReduction red = only_max_reduction(m, 3.0, 1.0);
    CHECK(red.budget_model.budget.has_value());
    CHECK(*red.budget_model.budget == 3.0);
    CHECK(red.case1.threshold(m.root) == 1.0);  // smallest value >= lambda1
    CHECK(red.case2.threshold(m.root) == 2.0);  // smallest value >= 2*lambda1
    CHECK(red.value1 >= 0.0);
    CHECK(red.value2 >= 0.0);

    // lambda1 above the support: both cases choose nothing.
    OnlyMaxReduction none = only_max_reduction(m, 3.0, 8.0);
    CHECK(none.value1 == 0.0);
    CHECK(none.value2 == 0.0);

    ArmModel odd = known_arm(0.3, 2);
    CHECK_THROWS_AS(only_max_reduction(odd, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(only_max_reduction(m, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("only-max reduction quarter-approximates the choice-cost optimum") {
    MixturePrior prior;
    prior.values = {1.0, 2.0};
    prior.components = {{0.5, {0.8, 0.2}}, {0.5, {0.3, 0.7}}};
    ArmModel m = build_mixture(prior, 2);
    const double budget = 2.0;

    // Exact best excess value when only chosen values are charged: DP over
    // (state, remaining integer budget).
    auto brute = [&](double lambda1) {
        std::vector<std::vector<double>> memo(
            static_cast<std::size_t>(m.num_states()),
            std::vector<double>(static_cast<std::size_t>(budget) + 1, -1.0));
        auto go = [&](auto&& self, StateId u, int left) -> double {
            double& slot = memo[static_cast<std::size_t>(u)][static_cast<std::size_t>(left)];
            if (slot >= 0.0) return slot;
            double best = 0.0;
            if (m.state(u).playable) {
                double acc = 0.0;
                for (const ArmEdge& e : m.state(u).edges) {
                    const int cost = static_cast<int>(e.value);
                    double skip = self(self, e.child, left);
                    double take = cost <= left
                                      ? (e.value - lambda1) + self(self, e.child, left - cost)
                                      : skip;
                    acc += e.prob * std::max(skip, take);
                }
                best = std::max(best, acc);
            }
            slot = best;
            return slot;
        };
        return go(go, m.root, static_cast<int>(budget));
    };

    for (double lambda1 : {0.5, 0.75, 1.0}) {
        OnlyMaxReduction red = only_max_reduction(m, budget, lambda1);
        CAPTURE(lambda1);
        CHECK(std::max(red.value1, red.value2) >= 0.25 * brute(lambda1) - 1e-9);
    }
}

} // TEST_SUITE
