#pragma once
// Global schedulers that execute a collection of single-arm policies as one
// feasible multi-armed policy.
//
// The combined policy keeps an ordered list of arms and an active window of at
// most K of them.  Each slot plays every active arm once; when a policy quits
// (its action at the current belief state is Stop), the arm retires and the
// next arm in the list becomes active within the same slot.  Retired arms
// never resume, so each arm's plays form one contiguous run.
//
// With `alpha` < 1 each arm independently participates with probability alpha
// and is otherwise replaced by the null (never-play) policy; this subsampling
// is what makes an arbitrary, even adversarial, arm order safe.

#include <cstdint>
#include <optional>
#include <vector>

#include "fhbandit/policy.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

struct ScheduleConfig {
    int plays_per_slot = 1;  // K: maximum plays in one slot
    int horizon = 0;         // T: number of slots
    // Fixed arm order (e.g. chosen by an adversary).  Empty -> order arms by
    // decreasing reward/plays ratio of their policies.
    std::optional<std::vector<int>> given_order;
    double alpha = 1.0;      // per-arm participation probability in (0,1]
};

// Arms sorted by decreasing R/T_plays; a policy with T_plays = 0 has ratio
// -infinity and goes last.  Ties break by arm index ascending.
std::vector<int> order_by_ratio(const std::vector<PolicyStats>& stats);

// Convenience: stats of each mixed policy on its arm, then order_by_ratio.
std::vector<int> ranked_order(const std::vector<ArmModel>& arms,
                              const std::vector<MixedArmPolicy>& policies);

// Simulates one episode of the combined policy.  All randomness derives from
// (seed, episode): lane 0 seeds the per-arm true parameters, then one
// participation coin per arm, then one policy-branch coin per arm, all in arm
// index order; lane i+1 drives arm i's observations.  Identical inputs give a
// bit-identical EpisodeResult on any thread count.
EpisodeResult run_combined(const std::vector<ArmModel>& arms,
                           const std::vector<MixedArmPolicy>& policies,
                           const ScheduleConfig& cfg,
                           std::uint64_t seed, std::uint64_t episode);

} // namespace fhbandit
