#include "fhbandit/policy.hpp"

#include <stdexcept>

namespace fhbandit {

PolicyStats policy_stats(const ArmModel& model, const SingleArmPolicy& policy) {
    const std::size_t n = static_cast<std::size_t>(model.num_states());
    if (policy.act.size() != n || policy.choose_min_value.size() != n)
        throw std::invalid_argument("policy_stats: policy does not cover the model's states");

    PolicyStats s;
    s.w.assign(n, 0.0);
    s.z.assign(n, 0.0);
    s.w[static_cast<std::size_t>(model.root)] = 1.0;

    bool uses_final = false, uses_choice = false;

    // State ids are topologically ordered, so a single ascending sweep sees
    // every parent before its children.
    for (StateId u = 0; u < model.num_states(); ++u) {
        const double wu = s.w[static_cast<std::size_t>(u)];
        if (wu <= 0.0) continue;
        const ArmState& st = model.state(u);
        switch (policy.action(u)) {
            case ArmAction::Stop:
                break;
            case ArmAction::ChooseFinal:
                uses_final = true;
                s.choose_final_prob += wu;
                s.final_value += wu * st.reward;
                break;
            case ArmAction::Play: {
                if (!st.playable)
                    throw std::invalid_argument("policy_stats: Play action on unplayable state");
                s.z[static_cast<std::size_t>(u)] = wu;
                s.plays += wu;
                s.play_reward += wu * st.reward;
                const double tau = policy.threshold(u);
                for (const ArmEdge& e : st.edges) {
                    if (e.value >= tau) {
                        uses_choice = true;
                        s.choice_counts[e.value] += wu * e.prob;
                        s.choice_value += wu * e.prob * e.value;
                    }
                    s.w[static_cast<std::size_t>(e.child)] += wu * e.prob;
                }
                break;
            }
        }
    }

    s.reward = uses_final ? s.final_value : (uses_choice ? s.choice_value : s.play_reward);
    return s;
}

PolicyStats policy_stats(const ArmModel& model, const MixedArmPolicy& policy) {
    PolicyStats total;
    const std::size_t n = static_cast<std::size_t>(model.num_states());
    total.w.assign(n, 0.0);
    total.z.assign(n, 0.0);
    for (const auto& br : policy.branches) {
        PolicyStats s = policy_stats(model, br.policy);
        total.reward += br.weight * s.reward;
        total.play_reward += br.weight * s.play_reward;
        total.choice_value += br.weight * s.choice_value;
        total.final_value += br.weight * s.final_value;
        total.plays += br.weight * s.plays;
        total.choose_final_prob += br.weight * s.choose_final_prob;
        for (const auto& [q, cnt] : s.choice_counts) total.choice_counts[q] += br.weight * cnt;
        for (std::size_t i = 0; i < n; ++i) {
            total.w[i] += br.weight * s.w[i];
            total.z[i] += br.weight * s.z[i];
        }
    }
    return total;
}

SingleArmPolicy truncate_to_plays(const ArmModel& model, const SingleArmPolicy& policy, int max_plays) {
    SingleArmPolicy out = policy;
    for (StateId u = 0; u < model.num_states(); ++u) {
        // For a no-wait single-arm policy, a state at depth d is reached after
        // exactly d plays, so depth >= max_plays means the play budget is spent.
        if (model.state(u).depth >= max_plays && out.action(u) == ArmAction::Play)
            out.act[static_cast<std::size_t>(u)] = ArmAction::Stop;
    }
    return out;
}

} // namespace fhbandit
