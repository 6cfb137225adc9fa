#pragma once
// Budgeted learning: spend up to T exploration plays across all arms (plays
// yield no reward), then commit to one arm's current belief state and collect
// its posterior mean.
//
// The three-action gain DP prices a final commitment at lambda and each play
// at lambda/T:
//
//     Gain'(u) = max{ 0,  r_u - lambda,  -lambda/T + sum_v p_uv Gain'(v) },
//
// with ties resolved Stop, then ChooseFinal, then Play.  The balance search
// finds the largest lambda* whose total gain still covers the price,
// sum_i Q~_i(lambda*) >= lambda*, giving the certified upper bound
// 2*lambda* + sum_i Q~_i(lambda*).

#include <cstdint>
#include <vector>

#include "fhbandit/policy.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

struct BudgetedGainResult {
    std::vector<double> gain;  // Gain' per state
    SingleArmPolicy policy;    // Stop / ChooseFinal / Play per state
    double q = 0.0;            // Gain' at the root
};

BudgetedGainResult budgeted_gain_dp(const ArmModel& model, double lambda, int horizon);

struct BudgetedSolution {
    double lambda_star = 0.0;
    std::vector<SingleArmPolicy> policies;  // one per arm, pure
    std::vector<double> q_values;           // Q~_i(lambda*)
    double dual_bound = 0.0;                // 2*lambda* + sum Q~_i
    int iterations = 0;
};

// Binary search maintaining sum Q~(lambda-) >= lambda- > ... > sum Q~(lambda+),
// stopping once lambda+ - lambda- <= delta_tol * lambda- / 3; returns lambda-.
BudgetedSolution balance_lambda(const std::vector<ArmModel>& arms, int horizon,
                                double delta_tol);

// One sequential episode (K = 1): walk arms in `order`; a policy that chooses
// final ends the episode with that state's posterior mean; one that stops
// yields to the next arm; if the play budget runs out while a policy still
// wants to play, the current state is committed instead.  Exhausting all arms
// without a commitment scores 0.  Plays appear in the trace with chosen =
// false; the commitment itself is not a play.
EpisodeResult run_budgeted(const std::vector<ArmModel>& arms,
                           const BudgetedSolution& solution,
                           const std::vector<int>& order, int horizon,
                           std::uint64_t seed, std::uint64_t episode);

// Exact expectation of run_budgeted for a fixed solution, by enumerating
// every outcome path.  Independent cross-check for the Monte Carlo executor.
double brute_force_budgeted_value(const std::vector<ArmModel>& arms,
                                  const BudgetedSolution& solution,
                                  const std::vector<int>& order, int horizon);

} // namespace fhbandit
