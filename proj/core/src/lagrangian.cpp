#include "fhbandit/lagrangian.hpp"

#include <cmath>
#include <stdexcept>

namespace fhbandit {

GainResult gain_dp(const ArmModel& model, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("gain_dp: lambda must be >= 0");
    {
        ValidationReport rep = validate_martingale(model, 1e-9);
        if (!rep.passed) throw std::invalid_argument("gain_dp: model fails martingale validation");
    }

    GainResult res;
    const int n = model.num_states();
    res.gain.assign(static_cast<std::size_t>(n), 0.0);
    res.policy = SingleArmPolicy::all_stop(model);

    // Children have larger ids, so a descending sweep is bottom-up.
    for (StateId u = n - 1; u >= 0; --u) {
        const ArmState& st = model.state(u);
        if (!st.playable) continue;
        double g = st.reward - lambda;
        for (const ArmEdge& e : st.edges) g += e.prob * res.gain[static_cast<std::size_t>(e.child)];
        if (g > 0.0) {
            res.gain[static_cast<std::size_t>(u)] = g;
            res.policy.act[static_cast<std::size_t>(u)] = ArmAction::Play;
        }
        // Gain exactly 0 is achieved by stopping; ties go to Stop.
    }
    res.q = res.gain[static_cast<std::size_t>(model.root)];
    return res;
}

double gittins_index(const ArmModel& model, StateId u, double tol) {
    if (u < 0 || u >= model.num_states() || !model.state(u).playable)
        throw std::invalid_argument("gittins_index: state must be playable");

    // Re-rooted gain DP: compute Gain(.) as usual but read the value at u.
    auto q_at = [&](double lambda) {
        GainResult g = gain_dp(model, lambda);
        return g.gain[static_cast<std::size_t>(u)];
    };

    // Q(lambda, u) > 0 iff lambda < index; the index is at most max reward.
    double lo = 0.0, hi = 0.0;
    for (const auto& st : model.states) hi = std::max(hi, st.reward);
    hi = std::max(hi, 1.0);
    if (q_at(hi) > 0.0) return hi; // all rewards below lambda=hi are <= hi; cannot happen
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (q_at(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

LambdaOracle make_base_oracle(const std::vector<ArmModel>& arms) {
    return [&arms](double lambda) {
        OracleEval ev;
        for (const ArmModel& m : arms) {
            GainResult g = gain_dp(m, lambda);
            PolicyStats st = policy_stats(m, g.policy);
            ev.value += g.q;
            ev.consumption += st.plays;
            ev.policies.push_back(std::move(g.policy));
        }
        return ev;
    };
}

} // namespace fhbandit
