#pragma once
// Metric switching costs (K = 1): moving the single "play head" from arm i to
// arm j costs distance d(i, j) out of a total travel budget L.  The solver
// prices plays with a multiplier lambda, scores every arm by its gain-DP
// value Q_i(lambda), and picks the best bounded-length path through arms by
// exact orienteering; the coupled dual search over lambda then yields a
// certified upper bound and a two-branch mixed solution.  The executor walks
// one branch's path irrevocably, running each arm's policy to completion.

#include <cstdint>
#include <optional>
#include <vector>

#include "fhbandit/lagrangian.hpp"
#include "fhbandit/policy.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

struct MetricSpec {
    std::vector<std::vector<double>> distances;  // symmetric, zero diagonal
    int start = 0;                               // arm the play head begins on
    double travel_budget = 0.0;                  // L
};

// Throws std::invalid_argument unless `distances` is square, symmetric,
// non-negative, zero on the diagonal, and satisfies the triangle inequality
// within 1e-9; start must index a row and the budget must be >= 0.
void validate_metric(const MetricSpec& metric, int n_arms);

struct OrienteeringResult {
    std::vector<int> path;  // starts at `start`; distinct nodes
    double value = 0.0;     // sum of node rewards on the path (start included)
};

// Maximum-reward simple path from `start` of length <= budget, by dynamic
// programming over (visited subset, last node) minimal path length.  Among
// optimal paths returns the lexicographically least node sequence (so ties
// prefer stopping early and lower node indices).  n is capped at 20.
OrienteeringResult orienteering_exact(const MetricSpec& metric,
                                      const std::vector<double>& node_rewards);

struct SwitchingBranch {
    std::vector<int> path;                  // visit order, starts at metric.start
    std::vector<SingleArmPolicy> policies;  // indexed by arm id (all arms)
};

struct SwitchingSolution {
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double a = 1.0;  // probability of the minus branch
    SwitchingBranch minus, plus;
    double dual_bound = 0.0;
    double alpha = 0.5;  // per-arm participation probability for the executor
    bool searched = false;
};

// Coupled dual search whose per-lambda oracle is: gain DP on every arm, then
// exact orienteering over node rewards Q_i(lambda); consumption is the total
// expected plays along the chosen path, with target T.  alpha defaults to
// 1/2 when not supplied.
SwitchingSolution solve_switching(const std::vector<ArmModel>& arms,
                                  const MetricSpec& metric, int horizon, double eps,
                                  std::optional<double> alpha = std::nullopt);

struct SwitchingConfig {
    int horizon = 0;  // T: maximum total plays
    MetricSpec metric;
    double alpha = 0.5;
};

// One episode of a single branch: participation coins thin the path, the play
// head travels between kept arms (asserting total distance <= L), and each
// kept arm's policy runs until it quits; each play consumes one slot.
EpisodeResult run_switching(const std::vector<ArmModel>& arms,
                            const SwitchingBranch& branch, const SwitchingConfig& cfg,
                            std::uint64_t seed, std::uint64_t episode);

// As run_switching, but first resolves the solution's global branch coin.
EpisodeResult run_switching_mixed(const std::vector<ArmModel>& arms,
                                  const SwitchingSolution& solution,
                                  const SwitchingConfig& cfg, std::uint64_t seed,
                                  std::uint64_t episode);

} // namespace fhbandit
