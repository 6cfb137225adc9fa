#pragma once
// Max-reward bandit: each slot may play up to K distinct arms but scores only
// one observed value; a policy additionally decides, per play, whether the
// observed value is worth "choosing" as the slot reward.
//
// The per-arm DP prices a choice opportunity with multiplier lambda and each
// play with lambda/K:
//
//   gain(u) = max{ 0,  sum_{q > lambda} Pr[X_u=q](q - lambda)
//                      - lambda/K + sum_v p_uv gain(v) },
//
// and the induced choice rule takes any observed q > lambda, normalized per
// state to the smallest support value above lambda.  The coupled search
// targets the merged budget  sum_i (sum_q N(q,P_i) + T(P_i)/K) <= 2T.
//
// The truncated solver runs two multiplier levels — an outer one priced on
// choices, an inner one on plays — then caps every branch policy at beta*T
// plays; executors thin arms to participation probability alpha.  With the
// default alpha/beta the simultaneous-feedback executor keeps the total
// choice probability of each slot inside [1/3, 2/3] (stalling on a single
// hot arm, throttling an over-full set), which is what makes "max of the
// played values" comparable to the sum of per-arm choice values.

#include <cstdint>
#include <numbers>
#include <vector>

#include "fhbandit/lagrangian.hpp"
#include "fhbandit/policy.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

inline constexpr double kThrottleBeta = std::numbers::sqrt2 - 1.0;
inline constexpr double kThrottleAlpha =
    (1.0 - kThrottleBeta) / (6.0 * (1.0 + kThrottleBeta));

struct MaxMabGainResult {
    std::vector<double> gain;
    SingleArmPolicy policy;  // Play iff gain > 0; thresholds = min support > lambda
    double q = 0.0;          // gain at the root
};

MaxMabGainResult maxmab_gain_dp(const ArmModel& model, double lambda, int plays_per_slot);

// Coupled dual search with per-arm value sum_q q*N(q,P) and consumption
// sum_q N(q,P) + T(P)/K, target 2T.
LambdaSolution solve_maxmab(const std::vector<ArmModel>& arms, int plays_per_slot,
                            int horizon, double eps);

// Arms sorted by decreasing value/consumption ratio of their mixed policies
// (consumption = expected choices + plays/K); zero consumption sorts last,
// ties by index.
std::vector<int> maxmab_order(const std::vector<ArmModel>& arms,
                              const std::vector<MixedArmPolicy>& policies,
                              int plays_per_slot);

struct MaxMabRunConfig {
    int plays_per_slot = 1;  // K
    int horizon = 0;         // T
    double alpha = 0.5;      // per-arm participation probability
};

// One-at-a-time feedback: each slot walks the active arms in priority order,
// playing one at a time; the first observation at or above its state's
// threshold ends the slot and scores the maximum value observed in the slot.
// Quitting arms retire and the next arm in order becomes active immediately.
EpisodeResult run_maxmab_sequential(const std::vector<ArmModel>& arms,
                                    const std::vector<MixedArmPolicy>& policies,
                                    const MaxMabRunConfig& cfg, std::uint64_t seed,
                                    std::uint64_t episode);

struct TruncatedMaxMabSolution {
    std::vector<MixedArmPolicy> policies;  // up to four branches per arm, capped at max_plays
    // branch_lambda1[i][b]: the outer (choice-price) multiplier behind
    // policies[i].branches[b]; its thresholds encode that price per state.
    std::vector<std::vector<double>> branch_lambda1;
    double lambda1_minus = 0.0;
    double lambda1_plus = 0.0;
    double a1 = 1.0;  // probability of the outer minus side
    double alpha = 1.0;
    double beta = 1.0;
    int plays_per_slot = 1;  // K the solution was built for
    int max_plays = 0;       // floor(beta * T), at least 1
    double dual_bound = 0.0;
    double plays_consumption = 0.0;   // alpha * sum_i E[T(L_i)]
    double choice_consumption = 0.0;  // alpha * sum_i sum_q N(q, L_i)
    bool searched = false;            // outer search left lambda1 = 0?
};

// Outer bisection on the choice price (consumption alpha * sum N, target
// alpha*beta*T); for each outer multiplier an inner coupled search constrains
// total plays to K*T.  Branch policies are truncated to beta*T plays.
TruncatedMaxMabSolution solve_maxmab_truncated(const std::vector<ArmModel>& arms,
                                               int plays_per_slot, int horizon, double eps,
                                               double alpha, double beta);

// Simultaneous feedback: maintains up to K current arms; per slot either
// plays them all (total choice probability <= 2/3), stalls on one hot arm
// (probability >= 1/3), or throttles a greedy prefix into [1/3, 2/3].  All
// outcomes of a slot are revealed together and the slot scores the maximum.
EpisodeResult run_throttled(const std::vector<ArmModel>& arms,
                            const TruncatedMaxMabSolution& solution, int horizon,
                            std::uint64_t seed, std::uint64_t episode);

struct OnlyMaxReduction {
    ArmModel budget_model;  // same prior, rebuilt with the all-plays-cost budget
    SingleArmPolicy case1;  // choice threshold at lambda1 (small values allowed)
    SingleArmPolicy case2;  // choice threshold at the smallest value >= 2*lambda1
    double value1 = 0.0;    // sum_q (q - lambda1) N(q, case1)
    double value2 = 0.0;
};

// Reduction from only-the-chosen-value-costs budgets to all-plays-cost
// budgets: rebuilds the arm's space with budget B and returns the two
// threshold policies whose better half 4-approximates any budget-feasible
// policy's excess value at choice price lambda1.  Requires every positive
// support value to be a power of two (see round_down_pow2).
OnlyMaxReduction only_max_reduction(const ArmModel& model, double budget, double lambda1);

} // namespace fhbandit
