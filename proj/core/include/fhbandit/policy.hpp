#pragma once
// Single-arm policies and their expectation statistics.
//
// A deterministic single-arm policy assigns one action to every state:
//   Stop        — quit the arm (irrevocable);
//   Play        — play once, observe, move to the child state;
//   ChooseFinal — exploitation step of the budgeted variant: take this
//                 state's posterior mean as the final answer.
// Play states may additionally carry a choice threshold tau: when the
// observed value q satisfies q >= tau the arm offers q as a slot reward
// (max-reward variant).  tau = +infinity means "never choose".
//
// Dual searches return two-point randomizations: a small set of weighted
// deterministic branches, resolved by one coin per arm per episode.

#include <limits>
#include <map>
#include <vector>

#include "fhbandit/statespace.hpp"

namespace fhbandit {

enum class ArmAction : std::uint8_t { Stop = 0, Play = 1, ChooseFinal = 2 };

constexpr double kNeverChoose = std::numeric_limits<double>::infinity();

struct SingleArmPolicy {
    std::vector<ArmAction> act;            // one per state
    std::vector<double> choose_min_value;  // per state; observed q >= tau triggers a choice

    static SingleArmPolicy all_stop(const ArmModel& m) {
        SingleArmPolicy p;
        p.act.assign(static_cast<std::size_t>(m.num_states()), ArmAction::Stop);
        p.choose_min_value.assign(p.act.size(), kNeverChoose);
        return p;
    }

    ArmAction action(StateId u) const { return act[static_cast<std::size_t>(u)]; }
    double threshold(StateId u) const { return choose_min_value[static_cast<std::size_t>(u)]; }
};

// Weighted mixture of deterministic policies (e.g. the lambda-minus /
// lambda-plus pair of a dual search, or the nested two-level mix of the
// truncated max-reward solver flattened into up to four branches).  Generic
// over the deterministic policy type so the block-structured policies of the
// delayed-feedback variant mix the same way.
template <class P>
struct MixedPolicy {
    struct Branch {
        double weight = 1.0;
        P policy;
    };
    std::vector<Branch> branches;

    static MixedPolicy pure(P p) { return {{{1.0, std::move(p)}}}; }

    // a * minus + (1-a) * plus.
    static MixedPolicy two_point(P minus, P plus, double a) {
        MixedPolicy m;
        if (a > 0.0) m.branches.push_back({a, std::move(minus)});
        if (a < 1.0) m.branches.push_back({1.0 - a, std::move(plus)});
        return m;
    }

    // Resolve the branch coin with one uniform draw.
    const P& resolve(double coin) const {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < branches.size(); ++i) {
            acc += branches[i].weight;
            if (coin < acc) return branches[i].policy;
        }
        return branches.back().policy;
    }
};

using MixedArmPolicy = MixedPolicy<SingleArmPolicy>;

// Expectations of a policy computed by one forward pass over the DAG.
struct PolicyStats {
    double reward = 0.0;        // variant-appropriate R(P): see components below
    double play_reward = 0.0;   // sum_u z_u * r_u            (additive-reward variants)
    double choice_value = 0.0;  // sum_q q * N(q)             (max-reward variants)
    double final_value = 0.0;   // sum_{u: ChooseFinal} w_u * r_u  (budgeted variant)
    double plays = 0.0;         // T(P) = sum_u z_u
    double choose_final_prob = 0.0;              // I(P)
    std::map<double, double> choice_counts;      // N(q, P)
    std::vector<double> w;      // reach probability per state
    std::vector<double> z;      // play probability per state

    double choice_total() const {
        double s = 0.0;
        for (const auto& [q, n] : choice_counts) s += n;
        return s;
    }
};

// Forward pass from the root: w_root = 1, z_u = w_u iff the action is Play.
// PolicyStats::reward is play_reward unless the policy uses ChooseFinal
// (then final_value) or any finite choice threshold (then choice_value).
PolicyStats policy_stats(const ArmModel& model, const SingleArmPolicy& policy);

// Weighted combination over branches (same accounting as the two-point
// randomization in the dual search).
PolicyStats policy_stats(const ArmModel& model, const MixedArmPolicy& policy);

// Policy wrapper that stops after the first `max_plays` plays on every path
// (states at depth >= max_plays become Stop).  Used by the truncation step of
// the max-reward solver.
SingleArmPolicy truncate_to_plays(const ArmModel& model, const SingleArmPolicy& policy, int max_plays);

} // namespace fhbandit
