#pragma once
// Exact small-instance oracles, implemented independently of the solvers and
// executors they validate.  All of them enumerate adaptive decision trees by
// memoized backward induction over joint posterior states; arms with
// structurally identical models are treated as exchangeable so their joint
// states collapse to multisets.
//
// These are deliberately brute force: they exist to pin down ground truth on
// tiny instances, not to scale.

#include <cstdint>
#include <vector>

#include "fhbandit/policy.hpp"
#include "fhbandit/scheduler.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

// Optimal expected total reward over all adaptive policies that play at most
// K distinct arms per slot for T slots, observing outcomes immediately.
// Throws if the memoized joint space exceeds an internal size limit.
double exact_joint_opt(const std::vector<ArmModel>& arms, int K, int T);

// Exact expectation of run_combined's episode reward for a fixed policy
// collection: enumerates participation subsets, policy-branch choices, and
// every outcome path of the combined schedule.  Independent of run_combined's
// code path; used to cross-check the Monte Carlo executor.
double brute_force_combined_value(const std::vector<ArmModel>& arms,
                                  const std::vector<MixedArmPolicy>& policies,
                                  const ScheduleConfig& cfg);

// Switching variant (K=1): the player starts at arm `start`, pays metric
// distance when switching arms, and may spend at most `travel_budget` total
// distance.  Plays observe immediately; value is expected total reward.
double exact_switching_opt(const std::vector<ArmModel>& arms,
                           const std::vector<std::vector<double>>& distances,
                           int start, double travel_budget, int T);

// Max-bandit variant: each slot plays up to K distinct arms, adaptively
// within the slot, and scores only the maximum value observed in the slot.
double exact_maxmab_opt(const std::vector<ArmModel>& arms, int K, int T);

// Budgeted-learning variant: up to `play_budget` exploration plays in total
// (any interleaving), then one arm's current state is chosen and its
// posterior mean collected.  Plays themselves yield no reward.
double exact_budgeted_opt(const std::vector<ArmModel>& arms, int play_budget);

// Delayed-feedback variant (K=1): the outcome of a play made in slot s
// becomes visible after slot s + delay.  Undelivered outcomes still count
// toward reward; decisions see only delivered history.
double exact_delayed_opt(const std::vector<ArmModel>& arms, int T, int delay);

} // namespace fhbandit
