#pragma once
// Delayed-feedback variant: block-structured per-arm policies, the block-DP
// dual search, the delay-free-simulation and block-compaction execution
// transforms, and the active/passive global scheduler.
//
// Feedback timing convention used everywhere: the outcome of a play made in
// slot s is delivered at the end of slot s + delay, so it can inform decisions
// from slot s + delay + 1 on.  With delay = 0 this is exactly the undelayed
// game, and the whole pipeline reproduces the combined scheduler bit for bit.
//
// A block-structured policy alternates bursts of at most delay+1 feedback-free
// plays with waits that let the burst's outcomes land before the next decision
// (a full burst plus its wait spans 2*delay+1 slots).  The dual search runs
// over these policies on a doubled block budget; the two execution transforms
// then trade extra plays for horizon so the scheduler can realize a constant
// fraction of the dual bound:
//   - delay-free switch: after a cumulative-play trigger the arm keeps playing
//     every slot, steering by outcomes that lag `delay` plays behind;
//   - block compaction: bursts are amplified rho-fold and the surplus outcomes
//     replay later equal-size-class bursts in zero slots.

#include <cstdint>
#include <vector>

#include "fhbandit/lagrangian.hpp"
#include "fhbandit/policy.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

struct BlockTransition {
    StateId to = -1;
    double prob = 0.0;
};

// Burst-granular view of an arm: the distribution of the posterior state after
// l feedback-free plays, for every l the model can support without crossing an
// unplayable state on any branch.
struct BlockModel {
    ArmModel base;
    int delay = 0;
    int block_length = 1;         // 2*delay + 1 slots per full block
    int max_plays_per_block = 1;  // delay + 1 (lower it to restrict the DP)
    int block_count = 0;          // blocks covering twice the slot horizon
    // trans[u][l]: state distribution after l plays from u.  l = 1 keeps the
    // single-play edge order; l >= 2 lists entries ascending by state id.
    // trans[u].size() - 1 = largest burst allowed at u.
    std::vector<std::vector<std::vector<BlockTransition>>> trans;

    int allowed(StateId u) const {
        return static_cast<int>(trans[static_cast<std::size_t>(u)].size()) - 1;
    }
    // Expected reward of an l-play burst from u; the martingale makes every
    // blind play worth the current posterior mean.
    double burst_reward(StateId u, int l) const { return l * base.state(u).reward; }
};

// Builds the burst transitions by l-fold convolution of single-play edges.
// `horizon` is the slot horizon T; the block budget covers 2T slots.
BlockModel block_model(const ArmModel& model, int delay, int horizon);

// Deterministic burst choice per (state, block index), plus the execution-mode
// envelope applied by the transforms.  A zero choice waits one block; under
// the gain DP's tie rule the gain table is non-increasing in the block index,
// so the first zero on the play path means the arm has quit for good.
struct BlockPolicy {
    enum class Mode : std::uint8_t { BlockOnly, DelayFreeAfterSwitch, Compacted };

    std::vector<std::vector<int>> choice;  // [state][block] -> burst size
    Mode mode = Mode::BlockOnly;
    int delay = 0;
    int block_count = 0;
    // DelayFreeAfterSwitch: enter delay-free mode at the first decision point
    // where cumulative plays reach this trigger (ceil(r_param * delay)).
    long switch_after_plays = 0;
    double gamma = 0.0;    // block-structured prefix fits gamma * T slots
    double r_param = 0.0;  // plays inflate by at most 1 + 1/r (delay-free)
    double rho = 0.0;      // burst amplification factor (compaction)

    int burst(StateId u, int b) const {
        return choice[static_cast<std::size_t>(u)][static_cast<std::size_t>(b)];
    }
};

struct BlockGainResult {
    std::vector<std::vector<double>> gain;  // [state][block]
    BlockPolicy policy;
    double q = 0.0;  // gain at (root, block 0)
    PolicyStats stats;
};

// Backward induction over (state, block):
//   Gain(u, b) = max_l { l*(r_u - lambda) + sum_v p(u,v,l) * Gain(v, b+1) },
// Gain(., block_count) = 0.  Ties: a positive-value burst beats waiting and
// the smallest such burst wins, so the policy commits plays as early as
// possible and a zero choice means the arm has quit for good.  plays_per_slot
// only scales the coupled target (K*T) held by the caller.
BlockGainResult block_gain_dp(const BlockModel& bm, double lambda, int plays_per_slot = 1);

// Expected reward and plays of a block policy (forward pass over the
// (state, block) table).  reward = play reward; choice fields stay zero.
PolicyStats block_policy_stats(const BlockModel& bm, const BlockPolicy& policy);

PolicyStats block_policy_stats(const BlockModel& bm, const MixedPolicy<BlockPolicy>& policy);

// Marks the policy to switch into delay-free mode at the end of the block
// containing the ceil(r_param * delay)-th play.  delay = 0 returns the policy
// unchanged.
BlockPolicy delay_free_transform(const BlockPolicy& policy, double r_param);

// Marks the policy for compacted execution with amplification rho (bursts
// larger than delay/rho switch to delay-free mode instead).  Requires the
// slot horizon to satisfy horizon >= 21 * (2*delay+1) * (1 + log2(delay));
// otherwise throws std::domain_error pointing at the small-delay path.
BlockPolicy block_compaction_transform(const BlockPolicy& policy, int horizon, double rho = 13.0);

using MixedBlockPolicy = MixedPolicy<BlockPolicy>;
using BlockOracleEval = OracleEvalT<BlockPolicy>;
using BlockLambdaSolution = LambdaSolutionT<BlockPolicy>;

enum class DelayRegime { Auto, Small, Large };

struct DelayedSolution {
    std::vector<BlockModel> blocks;            // one per arm
    BlockLambdaSolution dual;                  // untransformed two-point mixes
    std::vector<MixedBlockPolicy> run_policies;  // transformed for execution
    std::vector<int> order;                    // descending reward/plays ratio
    DelayRegime regime = DelayRegime::Small;   // resolved regime
    double alpha = 1.0;                        // participation probability
    double gamma = 0.0;
    double r_param = 0.0;
    double rho = 0.0;
    double dual_bound = 0.0;
};

// Block dual search (consumption = expected plays, target K*T) followed by the
// regime's execution transform.  Auto picks Small when max delay <= sqrt(T)/50,
// else Large when every arm satisfies the compaction horizon hypothesis, else
// throws std::domain_error.
DelayedSolution solve_delayed(const std::vector<ArmModel>& arms, int plays_per_slot,
                              int horizon, double eps,
                              DelayRegime regime = DelayRegime::Auto);

struct DelayedRunConfig {
    int plays_per_slot = 1;
    int horizon = 0;
    double alpha = 1.0;
    // Fixed priority order; empty -> recompute the ratio order per episode
    // (convenient in tests; pass DelayedSolution::order for bulk runs).
    std::vector<int> order;
};

// Ratio order of mixed block policies (rebuilds the block models; exposed so
// callers can precompute DelayedRunConfig::order).
std::vector<int> delayed_ranked_order(const std::vector<ArmModel>& arms,
                                      const std::vector<MixedBlockPolicy>& policies,
                                      int horizon);

// Per-episode audit counters for the compaction block-count bound.
struct DelayedAudit {
    std::vector<long> sim_blocks;    // bursts committed on the decision path
    std::vector<long> real_blocks;   // bursts that consumed real plays
    std::vector<long> real_plays;
};

// One episode of the active/passive scheduler.  Each slot plays the first
// plays_per_slot ready arms in priority order; feedback delivered at the end
// of slot s + delay updates simulations and readiness.  Randomness layout
// matches run_combined exactly: lane 0 draws samplers, participation coins and
// branch coins in arm index order; lane i+1 drives arm i's outcomes.
// Asserts that no outcome is consumed before its delivery slot.
EpisodeResult run_delayed(const std::vector<ArmModel>& arms,
                          const std::vector<MixedBlockPolicy>& policies,
                          const DelayedRunConfig& cfg, std::uint64_t seed,
                          std::uint64_t episode, DelayedAudit* audit = nullptr);

} // namespace fhbandit
