#include "fhbandit/budgeted.hpp"

#include <functional>
#include <stdexcept>

namespace fhbandit {

BudgetedGainResult budgeted_gain_dp(const ArmModel& model, double lambda, int horizon) {
    if (lambda < 0.0) throw std::invalid_argument("budgeted_gain_dp: lambda must be >= 0");
    if (horizon < 1) throw std::invalid_argument("budgeted_gain_dp: horizon must be >= 1");
    {
        ValidationReport rep = validate_martingale(model, 1e-9);
        if (!rep.passed)
            throw std::invalid_argument("budgeted_gain_dp: model fails martingale validation");
    }

    BudgetedGainResult res;
    const int n = model.num_states();
    res.gain.assign(static_cast<std::size_t>(n), 0.0);
    res.policy = SingleArmPolicy::all_stop(model);

    for (StateId u = n - 1; u >= 0; --u) {
        const ArmState& st = model.state(u);
        double g = 0.0;  // stopping concedes the state
        ArmAction act = ArmAction::Stop;
        const double choose_val = st.reward - lambda;
        if (choose_val > g) {
            g = choose_val;
            act = ArmAction::ChooseFinal;
        }
        if (st.playable) {
            double play_val = -lambda / static_cast<double>(horizon);
            for (const ArmEdge& e : st.edges)
                play_val += e.prob * res.gain[static_cast<std::size_t>(e.child)];
            if (play_val > g) {
                g = play_val;
                act = ArmAction::Play;
            }
        }
        res.gain[static_cast<std::size_t>(u)] = g;
        res.policy.act[static_cast<std::size_t>(u)] = act;
    }
    res.q = res.gain[static_cast<std::size_t>(model.root)];
    return res;
}

BudgetedSolution balance_lambda(const std::vector<ArmModel>& arms, int horizon,
                                double delta_tol) {
    if (delta_tol <= 0.0 || delta_tol >= 1.0)
        throw std::invalid_argument("balance_lambda: delta_tol must be in (0,1)");
    const int n = static_cast<int>(arms.size());

    auto total_q = [&](double lambda) {
        double sum = 0.0;
        for (const auto& m : arms) sum += budgeted_gain_dp(m, lambda, horizon).q;
        return sum;
    };

    BudgetedSolution sol;
    const double m0 = total_q(0.0);
    if (m0 <= 0.0) {
        sol.lambda_star = 0.0;
    } else {
        double lo = 0.0;
        double hi = 2.0 * m0;
        int guard = 0;
        while (total_q(hi) >= hi) {
            hi *= 2.0;
            if (++guard > 64)
                throw std::runtime_error("balance_lambda: no upper bracket found");
        }
        int iters = 0;
        while (hi - lo > delta_tol * lo / 3.0) {
            const double mid = 0.5 * (lo + hi);
            if (total_q(mid) >= mid) lo = mid; else hi = mid;
            if (++iters > 500)
                throw std::runtime_error("balance_lambda: bisection failed to converge");
        }
        sol.lambda_star = lo;
        sol.iterations = iters;
    }

    double sum_q = 0.0;
    for (int i = 0; i < n; ++i) {
        BudgetedGainResult g = budgeted_gain_dp(arms[static_cast<std::size_t>(i)],
                                                sol.lambda_star, horizon);
        sum_q += g.q;
        sol.q_values.push_back(g.q);
        sol.policies.push_back(std::move(g.policy));
    }
    sol.dual_bound = 2.0 * sol.lambda_star + sum_q;
    return sol;
}

namespace {

void check_budgeted_args(const std::vector<ArmModel>& arms, const BudgetedSolution& solution,
                         const std::vector<int>& order, int horizon) {
    const int n = static_cast<int>(arms.size());
    if (solution.policies.size() != arms.size())
        throw std::invalid_argument("run_budgeted: |policies| != |arms|");
    if (horizon < 1) throw std::invalid_argument("run_budgeted: horizon must be >= 1");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    if (static_cast<int>(order.size()) != n)
        throw std::invalid_argument("run_budgeted: order is not a permutation");
    for (int i : order) {
        if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
            throw std::invalid_argument("run_budgeted: order is not a permutation");
        seen[static_cast<std::size_t>(i)] = 1;
    }
}

} // namespace

EpisodeResult run_budgeted(const std::vector<ArmModel>& arms,
                           const BudgetedSolution& solution,
                           const std::vector<int>& order, int horizon,
                           std::uint64_t seed, std::uint64_t episode) {
    check_budgeted_args(arms, solution, order, horizon);
    const int n = static_cast<int>(arms.size());

    // Lane 0: per-arm parameters in index order; lane i+1: arm i's outcomes.
    RngStream setup = RngStream::substream(seed, episode, 0);
    std::vector<ArmSampler> samplers;
    samplers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) samplers.emplace_back(arms[static_cast<std::size_t>(i)], setup);
    std::vector<RngStream> lanes;
    lanes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        lanes.push_back(RngStream::substream(seed, episode, static_cast<std::uint64_t>(i) + 1));

    EpisodeResult ep;
    ep.plays_per_arm.assign(static_cast<std::size_t>(n), 0);
    int plays = 0;
    for (int armId : order) {
        const auto ai = static_cast<std::size_t>(armId);
        const ArmModel& model = arms[ai];
        const SingleArmPolicy& pol = solution.policies[ai];
        StateId u = model.root;
        for (;;) {
            const ArmAction act = pol.action(u);
            if (act == ArmAction::ChooseFinal) {
                ep.total_reward = model.state(u).reward;
                return ep;
            }
            if (act == ArmAction::Stop) break;
            if (plays == horizon) {
                // Play budget exhausted while the policy still wants to
                // explore: commit the current state instead.
                ep.total_reward = model.state(u).reward;
                return ep;
            }
            if (!model.state(u).playable)
                throw std::logic_error("run_budgeted: policy plays an unplayable state");
            const double q = samplers[ai].draw(lanes[ai]);
            const StateId v = model.child_on(u, q);
            if (v < 0) throw std::logic_error("run_budgeted: observation has no matching edge");
            ep.trace.push_back({plays, armId, q, false});
            ++ep.plays_per_arm[ai];
            ++plays;
            u = v;
        }
    }
    ep.total_reward = 0.0;  // every arm yielded without a commitment
    return ep;
}

double brute_force_budgeted_value(const std::vector<ArmModel>& arms,
                                  const BudgetedSolution& solution,
                                  const std::vector<int>& order, int horizon) {
    check_budgeted_args(arms, solution, order, horizon);
    const int n = static_cast<int>(arms.size());
    if (n == 0) return 0.0;

    std::function<double(int, StateId, int)> go = [&](int pos, StateId u, int plays) -> double {
        if (pos == n) return 0.0;
        const auto ai = static_cast<std::size_t>(order[static_cast<std::size_t>(pos)]);
        const ArmModel& model = arms[ai];
        const ArmAction act = solution.policies[ai].action(u);
        if (act == ArmAction::ChooseFinal) return model.state(u).reward;
        if (act == ArmAction::Stop) {
            const int next = pos + 1;
            return next == n ? 0.0 : go(next, arms[static_cast<std::size_t>(order[static_cast<std::size_t>(next)])].root, plays);
        }
        if (plays == horizon) return model.state(u).reward;
        double acc = 0.0;
        for (const ArmEdge& e : model.state(u).edges)
            acc += e.prob * go(pos, e.child, plays + 1);
        return acc;
    };
    return go(0, arms[static_cast<std::size_t>(order.front())].root, 0);
}

} // namespace fhbandit
