#include "fhbandit/maxmab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhbandit {

namespace {

struct ThresholdDpResult {
    std::vector<double> gain;
    SingleArmPolicy policy;
    double q = 0.0;
};

// Generic priced-choice DP.  Per playable state the choice rule takes every
// edge value v with v > rule_floor (or v >= rule_floor when inclusive),
// normalized to tau = the smallest such v; each taken value contributes
// v - excess_base and each play costs play_price:
//
//   gain(u) = max{0, sum_{v taken} p(v)(v - excess_base) - play_price
//                    + sum_v p_uv gain(v)}.
ThresholdDpResult threshold_dp(const ArmModel& model, double excess_base,
                               double rule_floor, bool inclusive, double play_price) {
    {
        ValidationReport rep = validate_martingale(model, 1e-9);
        if (!rep.passed)
            throw std::invalid_argument("threshold_dp: model fails martingale validation");
    }
    ThresholdDpResult res;
    const int n = model.num_states();
    res.gain.assign(static_cast<std::size_t>(n), 0.0);
    res.policy = SingleArmPolicy::all_stop(model);

    for (StateId u = n - 1; u >= 0; --u) {
        const ArmState& st = model.state(u);
        if (!st.playable) continue;
        double tau = kNeverChoose;
        for (const ArmEdge& e : st.edges) {
            const bool eligible = inclusive ? e.value >= rule_floor : e.value > rule_floor;
            if (eligible && e.value < tau) tau = e.value;
        }
        double g = -play_price;
        for (const ArmEdge& e : st.edges) {
            if (e.value >= tau) g += e.prob * (e.value - excess_base);
            g += e.prob * res.gain[static_cast<std::size_t>(e.child)];
        }
        if (g > 0.0) {
            res.gain[static_cast<std::size_t>(u)] = g;
            res.policy.act[static_cast<std::size_t>(u)] = ArmAction::Play;
            res.policy.choose_min_value[static_cast<std::size_t>(u)] = tau;
        }
    }
    res.q = res.gain[static_cast<std::size_t>(model.root)];
    return res;
}

double choice_probability(const ArmModel& model, const SingleArmPolicy& policy, StateId u) {
    const double tau = policy.threshold(u);
    double p = 0.0;
    for (const ArmEdge& e : model.state(u).edges)
        if (e.value >= tau) p += e.prob;
    return p;
}

} // namespace

MaxMabGainResult maxmab_gain_dp(const ArmModel& model, double lambda, int plays_per_slot) {
    if (lambda < 0.0) throw std::invalid_argument("maxmab_gain_dp: lambda must be >= 0");
    if (plays_per_slot < 1) throw std::invalid_argument("maxmab_gain_dp: K must be >= 1");
    ThresholdDpResult r = threshold_dp(model, lambda, lambda, /*inclusive=*/false,
                                       lambda / static_cast<double>(plays_per_slot));
    return {std::move(r.gain), std::move(r.policy), r.q};
}

LambdaSolution solve_maxmab(const std::vector<ArmModel>& arms, int plays_per_slot,
                            int horizon, double eps) {
    if (horizon < 1) throw std::invalid_argument("solve_maxmab: horizon must be >= 1");
    LambdaOracle oracle = [&arms, plays_per_slot](double lambda) {
        OracleEval ev;
        for (const ArmModel& m : arms) {
            MaxMabGainResult g = maxmab_gain_dp(m, lambda, plays_per_slot);
            PolicyStats st = policy_stats(m, g.policy);
            ev.value += g.q;
            ev.consumption += st.choice_total() + st.plays / static_cast<double>(plays_per_slot);
            ev.policies.push_back(std::move(g.policy));
        }
        return ev;
    };
    return coupled_lagrangian_search(oracle, static_cast<int>(arms.size()),
                                     2.0 * static_cast<double>(horizon), eps);
}

std::vector<int> maxmab_order(const std::vector<ArmModel>& arms,
                              const std::vector<MixedArmPolicy>& policies,
                              int plays_per_slot) {
    const int n = static_cast<int>(arms.size());
    std::vector<double> ratio(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        PolicyStats st = policy_stats(arms[static_cast<std::size_t>(i)],
                                      policies[static_cast<std::size_t>(i)]);
        const double denom = st.choice_total() + st.plays / static_cast<double>(plays_per_slot);
        ratio[static_cast<std::size_t>(i)] =
            denom > 0.0 ? st.choice_value / denom : -std::numeric_limits<double>::infinity();
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ra = ratio[static_cast<std::size_t>(a)];
        const double rb = ratio[static_cast<std::size_t>(b)];
        if (ra != rb) return ra > rb;
        return a < b;
    });
    return order;
}

EpisodeResult run_maxmab_sequential(const std::vector<ArmModel>& arms,
                                    const std::vector<MixedArmPolicy>& policies,
                                    const MaxMabRunConfig& cfg, std::uint64_t seed,
                                    std::uint64_t episode) {
    const int n = static_cast<int>(arms.size());
    if (policies.size() != arms.size())
        throw std::invalid_argument("run_maxmab_sequential: |arms| != |policies|");
    if (cfg.plays_per_slot < 1) throw std::invalid_argument("run_maxmab_sequential: K < 1");
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("run_maxmab_sequential: alpha outside (0,1]");

    const std::vector<int> order = maxmab_order(arms, policies, cfg.plays_per_slot);

    RngStream setup = RngStream::substream(seed, episode, 0);
    std::vector<ArmSampler> samplers;
    samplers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) samplers.emplace_back(arms[static_cast<std::size_t>(i)], setup);
    std::vector<char> participates(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        participates[static_cast<std::size_t>(i)] = setup.next_double() < cfg.alpha ? 1 : 0;
    std::vector<const SingleArmPolicy*> resolved(static_cast<std::size_t>(n), nullptr);
    for (int i = 0; i < n; ++i)
        resolved[static_cast<std::size_t>(i)] =
            &policies[static_cast<std::size_t>(i)].resolve(setup.next_double());
    std::vector<RngStream> lanes;
    lanes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        lanes.push_back(RngStream::substream(seed, episode, static_cast<std::uint64_t>(i) + 1));

    EpisodeResult ep;
    ep.plays_per_arm.assign(static_cast<std::size_t>(n), 0);
    std::vector<StateId> cursor(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cursor[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;
    std::vector<char> retired(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        if (!participates[static_cast<std::size_t>(i)]) retired[static_cast<std::size_t>(i)] = 1;

    for (int slot = 0; slot < cfg.horizon; ++slot) {
        int plays = 0;
        bool chose = false;
        double slot_max = 0.0;
        std::size_t max_rec = 0;
        bool any_play = false;
        for (int pos = 0; pos < n && plays < cfg.plays_per_slot && !chose; ++pos) {
            const int arm = order[static_cast<std::size_t>(pos)];
            const auto ai = static_cast<std::size_t>(arm);
            if (retired[ai]) continue;
            const StateId u = cursor[ai];
            if (resolved[ai]->action(u) != ArmAction::Play) {
                retired[ai] = 1;
                continue;
            }
            const ArmModel& model = arms[ai];
            if (!model.state(u).playable)
                throw std::logic_error("run_maxmab_sequential: policy plays an unplayable state");
            const double q = samplers[ai].draw(lanes[ai]);
            const StateId v = model.child_on(u, q);
            if (v < 0)
                throw std::logic_error("run_maxmab_sequential: observation has no matching edge");
            cursor[ai] = v;
            ++ep.plays_per_arm[ai];
            ++plays;
            ep.trace.push_back({slot, arm, q, false});
            if (!any_play || q > slot_max) {
                slot_max = q;
                max_rec = ep.trace.size() - 1;
            }
            any_play = true;
            if (q >= resolved[ai]->threshold(u)) chose = true;  // slot ends on a choice
        }
        if (chose) {
            ep.total_reward += slot_max;
            ep.trace[max_rec].chosen = true;
        }
        if (plays == 0) break;
    }
    return ep;
}

TruncatedMaxMabSolution solve_maxmab_truncated(const std::vector<ArmModel>& arms,
                                               int plays_per_slot, int horizon, double eps,
                                               double alpha, double beta) {
    const int n = static_cast<int>(arms.size());
    if (plays_per_slot < 1) throw std::invalid_argument("solve_maxmab_truncated: K < 1");
    if (horizon < 1) throw std::invalid_argument("solve_maxmab_truncated: horizon < 1");
    if (eps <= 0.0 || eps > 1.0)
        throw std::invalid_argument("solve_maxmab_truncated: eps outside (0,1]");
    if (alpha <= 0.0 || alpha > 1.0 || beta <= 0.0 || beta > 1.0)
        throw std::invalid_argument("solve_maxmab_truncated: alpha/beta outside (0,1]");

    const double eps_level = eps / 3.0;  // split across the two search levels
    const double kt = static_cast<double>(plays_per_slot) * static_cast<double>(horizon);
    const int max_plays =
        std::max(1, static_cast<int>(std::floor(beta * static_cast<double>(horizon) + 1e-9)));

    // Inner level: plays priced at lambda2, choices thresholded at lambda1.
    auto inner_solve = [&](double lambda1) {
        LambdaOracle oracle = [&arms, lambda1](double lambda2) {
            OracleEval ev;
            for (const ArmModel& m : arms) {
                ThresholdDpResult r =
                    threshold_dp(m, lambda1, lambda1, /*inclusive=*/false, lambda2);
                ev.value += r.q;
                ev.consumption += policy_stats(m, r.policy).plays;
                ev.policies.push_back(std::move(r.policy));
            }
            return ev;
        };
        return coupled_lagrangian_search(oracle, n, kt, eps_level);
    };

    struct OuterEval {
        LambdaSolution inner;
        std::vector<MixedArmPolicy> truncated;
        double choice_cons = 0.0;  // alpha * sum_i sum_q N(q, truncated mix)
        double plays_cons = 0.0;   // alpha * sum_i T(truncated mix)
        double dual = 0.0;         // lambda1 * T + inner dual
    };
    auto outer_eval = [&](double lambda1) {
        OuterEval oe;
        oe.inner = inner_solve(lambda1);
        oe.truncated.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto ai = static_cast<std::size_t>(i);
            MixedArmPolicy mp;
            for (const auto& br : oe.inner.policies[ai].branches)
                mp.branches.push_back(
                    {br.weight, truncate_to_plays(arms[ai], br.policy, max_plays)});
            PolicyStats st = policy_stats(arms[ai], mp);
            oe.choice_cons += alpha * st.choice_total();
            oe.plays_cons += alpha * st.plays;
            oe.truncated.push_back(std::move(mp));
        }
        oe.dual = lambda1 * static_cast<double>(horizon) + oe.inner.dual_bound;
        return oe;
    };

    const double outer_target = alpha * beta * static_cast<double>(horizon);
    TruncatedMaxMabSolution sol;
    sol.alpha = alpha;
    sol.beta = beta;
    sol.plays_per_slot = plays_per_slot;
    sol.max_plays = max_plays;

    OuterEval at_lo = outer_eval(0.0);
    const double m0 = at_lo.dual;
    auto finish_pure = [&](OuterEval&& oe, double lambda1) {
        sol.lambda1_minus = sol.lambda1_plus = lambda1;
        sol.a1 = 1.0;
        sol.dual_bound = oe.dual;
        sol.choice_consumption = oe.choice_cons;
        sol.plays_consumption = oe.plays_cons;
        sol.policies = std::move(oe.truncated);
        sol.branch_lambda1.assign(static_cast<std::size_t>(n), {});
        for (int i = 0; i < n; ++i)
            sol.branch_lambda1[static_cast<std::size_t>(i)]
                .assign(sol.policies[static_cast<std::size_t>(i)].branches.size(), lambda1);
    };
    if (at_lo.choice_cons <= outer_target || m0 <= 0.0) {
        finish_pure(std::move(at_lo), 0.0);
        sol.searched = false;
        return sol;
    }

    double hi = 1.0;
    OuterEval at_hi = outer_eval(hi);
    int guard = 0;
    while (at_hi.choice_cons > outer_target) {
        hi *= 2.0;
        at_hi = outer_eval(hi);
        if (++guard > 64)
            throw std::runtime_error("solve_maxmab_truncated: choice consumption stuck above target");
    }
    double lo = 0.0;
    const double gap_tol =
        eps_level * m0 / (2.0 * static_cast<double>(n) * static_cast<double>(horizon));
    int iters = 0;
    while (hi - lo > gap_tol) {
        const double mid = 0.5 * (lo + hi);
        OuterEval at_mid = outer_eval(mid);
        if (at_mid.choice_cons > outer_target) {
            lo = mid;
            at_lo = std::move(at_mid);
        } else {
            hi = mid;
            at_hi = std::move(at_mid);
        }
        if (++iters > 400)
            throw std::runtime_error("solve_maxmab_truncated: outer bisection failed to converge");
    }

    const double c_minus = at_lo.choice_cons;
    const double c_plus = at_hi.choice_cons;
    double a1 = (outer_target - c_plus) / (c_minus - c_plus);
    if (a1 < 0.0) a1 = 0.0;
    if (a1 > 1.0) a1 = 1.0;

    sol.searched = true;
    sol.lambda1_minus = lo;
    sol.lambda1_plus = hi;
    sol.a1 = a1;
    sol.dual_bound = a1 * at_lo.dual + (1.0 - a1) * at_hi.dual;
    sol.choice_consumption = a1 * c_minus + (1.0 - a1) * c_plus;
    sol.plays_consumption = a1 * at_lo.plays_cons + (1.0 - a1) * at_hi.plays_cons;
    sol.policies.resize(static_cast<std::size_t>(n));
    sol.branch_lambda1.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) {
        const auto ai = static_cast<std::size_t>(i);
        MixedArmPolicy mp;
        auto add_side = [&](const MixedArmPolicy& side, double weight, double lambda1) {
            if (weight <= 0.0) return;
            for (const auto& br : side.branches) {
                mp.branches.push_back({weight * br.weight, br.policy});
                sol.branch_lambda1[ai].push_back(lambda1);
            }
        };
        add_side(at_lo.truncated[ai], a1, lo);
        add_side(at_hi.truncated[ai], 1.0 - a1, hi);
        sol.policies[ai] = std::move(mp);
    }
    return sol;
}

EpisodeResult run_throttled(const std::vector<ArmModel>& arms,
                            const TruncatedMaxMabSolution& solution, int horizon,
                            std::uint64_t seed, std::uint64_t episode) {
    const int n = static_cast<int>(arms.size());
    if (solution.policies.size() != arms.size())
        throw std::invalid_argument("run_throttled: |arms| != |policies|");
    const int K = solution.plays_per_slot;
    if (K < 1) throw std::invalid_argument("run_throttled: K < 1");

    RngStream setup = RngStream::substream(seed, episode, 0);
    std::vector<ArmSampler> samplers;
    samplers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) samplers.emplace_back(arms[static_cast<std::size_t>(i)], setup);
    std::vector<char> participates(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        participates[static_cast<std::size_t>(i)] = setup.next_double() < solution.alpha ? 1 : 0;
    std::vector<const SingleArmPolicy*> resolved(static_cast<std::size_t>(n), nullptr);
    for (int i = 0; i < n; ++i)
        resolved[static_cast<std::size_t>(i)] =
            &solution.policies[static_cast<std::size_t>(i)].resolve(setup.next_double());
    std::vector<RngStream> lanes;
    lanes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        lanes.push_back(RngStream::substream(seed, episode, static_cast<std::uint64_t>(i) + 1));

    EpisodeResult ep;
    ep.plays_per_arm.assign(static_cast<std::size_t>(n), 0);
    std::vector<StateId> cursor(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cursor[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;

    enum class Status : std::uint8_t { Ready, Current, Finished };
    std::vector<Status> status(static_cast<std::size_t>(n), Status::Ready);
    for (int i = 0; i < n; ++i)
        if (!participates[static_cast<std::size_t>(i)]) status[static_cast<std::size_t>(i)] = Status::Finished;
    std::vector<int> current;  // insertion order
    int next_ready = 0;
    auto refill = [&]() {
        for (;;) {
            bool changed = false;
            for (auto it = current.begin(); it != current.end();) {
                const auto ai = static_cast<std::size_t>(*it);
                if (resolved[ai]->action(cursor[ai]) != ArmAction::Play) {
                    status[ai] = Status::Finished;
                    it = current.erase(it);
                    changed = true;
                } else {
                    ++it;
                }
            }
            while (static_cast<int>(current.size()) < K && next_ready < n) {
                const auto ai = static_cast<std::size_t>(next_ready);
                if (status[ai] == Status::Ready) {
                    status[ai] = Status::Current;
                    current.push_back(next_ready);
                    changed = true;
                }
                ++next_ready;
            }
            if (!changed) break;
        }
    };

    for (int slot = 0; slot < horizon; ++slot) {
        refill();
        if (current.empty()) break;

        std::vector<double> prob;
        prob.reserve(current.size());
        double total = 0.0;
        for (int arm : current) {
            const auto ai = static_cast<std::size_t>(arm);
            const double p = choice_probability(arms[ai], *resolved[ai], cursor[ai]);
            prob.push_back(p);
            total += p;
        }

        // Slot classification: stall on a single hot arm, otherwise play the
        // full set when its total choice probability fits, otherwise throttle
        // a greedy prefix into [1/3, 2/3].
        std::vector<int> play_set;
        int hot = -1;
        for (std::size_t s = 0; s < current.size(); ++s)
            if (prob[s] >= 1.0 / 3.0 && (hot < 0 || prob[s] > prob[static_cast<std::size_t>(hot)]))
                hot = static_cast<int>(s);
        if (hot >= 0) {
            play_set.push_back(current[static_cast<std::size_t>(hot)]);
        } else if (total <= 2.0 / 3.0) {
            play_set = current;
        } else {
            double acc = 0.0;
            for (std::size_t s = 0; s < current.size() && acc < 1.0 / 3.0; ++s) {
                play_set.push_back(current[s]);
                acc += prob[s];
            }
            if (acc < 1.0 / 3.0 || acc > 2.0 / 3.0 + 1e-12)
                throw std::logic_error("run_throttled: throttled subset left the [1/3, 2/3] window");
        }
        if (static_cast<int>(play_set.size()) > K)
            throw std::logic_error("run_throttled: more than K plays in a slot");

        // Simultaneous plays: all outcomes drawn, then the slot scores the max.
        double slot_max = 0.0;
        std::size_t max_rec = 0;
        bool any = false;
        for (int arm : play_set) {
            const auto ai = static_cast<std::size_t>(arm);
            const ArmModel& model = arms[ai];
            const StateId u = cursor[ai];
            if (!model.state(u).playable)
                throw std::logic_error("run_throttled: policy plays an unplayable state");
            const double q = samplers[ai].draw(lanes[ai]);
            const StateId v = model.child_on(u, q);
            if (v < 0) throw std::logic_error("run_throttled: observation has no matching edge");
            cursor[ai] = v;
            ++ep.plays_per_arm[ai];
            ep.trace.push_back({slot, arm, q, false});
            if (!any || q > slot_max) {
                slot_max = q;
                max_rec = ep.trace.size() - 1;
            }
            any = true;
        }
        if (any && slot_max > 0.0) {
            ep.total_reward += slot_max;
            ep.trace[max_rec].chosen = true;
        }
    }
    return ep;
}

OnlyMaxReduction only_max_reduction(const ArmModel& model, double budget, double lambda1) {
    if (budget < 0.0) throw std::invalid_argument("only_max_reduction: negative budget");
    if (lambda1 < 0.0) throw std::invalid_argument("only_max_reduction: negative lambda1");
    for (double v : model.value_support()) {
        if (v <= 0.0) continue;
        int exp = 0;
        const double mant = std::frexp(v, &exp);
        if (mant != 0.5)
            throw std::invalid_argument(
                "only_max_reduction: support values must be powers of two (round them first)");
    }

    OnlyMaxReduction red;
    red.budget_model = std::visit(
        [&](const auto& prior) -> ArmModel {
            using P = std::decay_t<decltype(prior)>;
            if constexpr (std::is_same_v<P, BetaPrior>)
                return build_beta_bernoulli(prior.alpha1, prior.alpha0, model.horizon, budget);
            else if constexpr (std::is_same_v<P, MixturePrior>)
                return build_mixture(prior, model.horizon, budget);
            else
                return build_explicit(prior, model.horizon, budget);
        },
        model.prior);

    ThresholdDpResult c1 =
        threshold_dp(red.budget_model, lambda1, lambda1, /*inclusive=*/true, 0.0);
    ThresholdDpResult c2 =
        threshold_dp(red.budget_model, lambda1, 2.0 * lambda1, /*inclusive=*/true, 0.0);
    PolicyStats s1 = policy_stats(red.budget_model, c1.policy);
    PolicyStats s2 = policy_stats(red.budget_model, c2.policy);
    red.value1 = s1.choice_value - lambda1 * s1.choice_total();
    red.value2 = s2.choice_value - lambda1 * s2.choice_total();
    red.case1 = std::move(c1.policy);
    red.case2 = std::move(c2.policy);
    return red;
}

} // namespace fhbandit
