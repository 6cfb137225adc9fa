#include "fhbandit/delayed.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <cstddef>
#include <deque>
#include <set>
#include <stdexcept>
#include <utility>

#include "fhbandit/rng.hpp"
#include "fhbandit/scheduler.hpp"

namespace fhbandit {

namespace {

// Compaction needs enough slots for the amplified prefix:
//   horizon >= 21 * (2*delay + 1) * (1 + log2(delay)),
// with log2 taken as 0 for delay <= 1.
bool compaction_hypothesis(int horizon, int delay) {
    const double logd = delay >= 2 ? std::log2(static_cast<double>(delay)) : 0.0;
    return static_cast<double>(horizon) >= 21.0 * (2.0 * delay + 1.0) * (1.0 + logd);
}

} // namespace

BlockModel block_model(const ArmModel& model, int delay, int horizon) {
    if (delay < 0) throw std::invalid_argument("block_model: delay must be >= 0");
    if (horizon < 1) throw std::invalid_argument("block_model: horizon must be >= 1");
    {
        const ValidationReport rep = validate_martingale(model, 1e-9);
        if (!rep.passed)
            throw std::invalid_argument("block_model: model fails martingale validation");
    }

    BlockModel bm;
    bm.base = model;
    bm.delay = delay;
    bm.block_length = 2 * delay + 1;
    bm.max_plays_per_block = delay + 1;
    bm.block_count = (2 * horizon + bm.block_length - 1) / bm.block_length;

    const std::size_t n = static_cast<std::size_t>(model.num_states());

    // Largest feedback-free burst from each state: one play plus the smallest
    // burst any child still supports, so no branch of a burst ever reaches an
    // unplayable state with plays left.
    std::vector<int> allow(n, 0);
    for (StateId u = model.num_states() - 1; u >= 0; --u) {
        const ArmState& st = model.state(u);
        if (!st.playable || st.edges.empty()) continue;
        int child_min = INT_MAX;
        for (const ArmEdge& e : st.edges)
            child_min = std::min(child_min, allow[static_cast<std::size_t>(e.child)]);
        allow[static_cast<std::size_t>(u)] = std::min(bm.max_plays_per_block, 1 + child_min);
    }

    bm.trans.resize(n);
    // Scratch for the dense convolution accumulator.
    std::vector<double> acc(n, 0.0);
    std::vector<char> mark(n, 0);
    std::vector<StateId> touched;

    for (StateId u = model.num_states() - 1; u >= 0; --u) {
        const auto ui = static_cast<std::size_t>(u);
        const int top = allow[ui];
        auto& rows = bm.trans[ui];
        rows.resize(static_cast<std::size_t>(top) + 1);
        rows[0] = {{u, 1.0}};
        if (top >= 1) {
            const ArmState& st = model.state(u);
            rows[1].reserve(st.edges.size());
            for (const ArmEdge& e : st.edges) rows[1].push_back({e.child, e.prob});
            for (int l = 2; l <= top; ++l) {
                touched.clear();
                for (const ArmEdge& e : st.edges) {
                    const auto ci = static_cast<std::size_t>(e.child);
                    for (const BlockTransition& t : bm.trans[ci][static_cast<std::size_t>(l - 1)]) {
                        const auto ti = static_cast<std::size_t>(t.to);
                        if (!mark[ti]) {
                            mark[ti] = 1;
                            touched.push_back(t.to);
                        }
                        acc[ti] += e.prob * t.prob;
                    }
                }
                std::sort(touched.begin(), touched.end());
                rows[static_cast<std::size_t>(l)].reserve(touched.size());
                for (StateId v : touched) {
                    const auto vi = static_cast<std::size_t>(v);
                    rows[static_cast<std::size_t>(l)].push_back({v, acc[vi]});
                    acc[vi] = 0.0;
                    mark[vi] = 0;
                }
            }
        }
        // Every l-step law must stay a probability distribution whose mean is
        // the current posterior mean (iterated martingale property).
        for (int l = 1; l <= top; ++l) {
            double mass = 0.0, mean = 0.0;
            for (const BlockTransition& t : rows[static_cast<std::size_t>(l)]) {
                mass += t.prob;
                mean += t.prob * model.state(t.to).reward;
            }
            if (std::abs(mass - 1.0) > 1e-9 ||
                std::abs(mean - model.state(u).reward) > 1e-9)
                throw std::logic_error("block_model: burst transition law is inconsistent");
        }
    }
    return bm;
}

BlockGainResult block_gain_dp(const BlockModel& bm, double lambda, int plays_per_slot) {
    if (lambda < 0.0) throw std::invalid_argument("block_gain_dp: lambda must be >= 0");
    if (plays_per_slot < 1)
        throw std::invalid_argument("block_gain_dp: plays_per_slot must be >= 1");
    const ArmModel& m = bm.base;
    const std::size_t n = static_cast<std::size_t>(m.num_states());
    const int blocks = bm.block_count;

    BlockGainResult out;
    out.gain.assign(n, std::vector<double>(static_cast<std::size_t>(blocks) + 1, 0.0));
    out.policy.choice.assign(n, std::vector<int>(static_cast<std::size_t>(blocks), 0));
    out.policy.delay = bm.delay;
    out.policy.block_count = blocks;

    // States are topologically ordered, so a descending sweep sees every
    // child before its parents; within a state the block index descends so
    // that (u, b+1) is ready when (u, b) is computed.
    for (StateId u = m.num_states() - 1; u >= 0; --u) {
        const auto ui = static_cast<std::size_t>(u);
        const int top = bm.allowed(u);
        if (top == 0) continue;  // never playable: the zero rows stand
        const double margin = m.state(u).reward - lambda;
        auto& grow = out.gain[ui];
        auto& crow = out.policy.choice[ui];
        for (int b = blocks - 1; b >= 0; --b) {
            double best = grow[static_cast<std::size_t>(b) + 1];  // wait one block
            int best_l = 0;
            for (int l = 1; l <= top; ++l) {
                double val = static_cast<double>(l) * margin;
                for (const BlockTransition& t : bm.trans[ui][static_cast<std::size_t>(l)])
                    val += t.prob *
                           out.gain[static_cast<std::size_t>(t.to)][static_cast<std::size_t>(b) + 1];
                // A positive-value burst beats waiting; among bursts the
                // smallest wins.  Waiting can never strictly beat the best
                // burst when that value is positive, so the play path never
                // stalls and the first zero choice means the arm quit.
                if (val > best || (best_l == 0 && val == best && val > 0.0)) {
                    best = val;
                    best_l = l;
                }
            }
            grow[static_cast<std::size_t>(b)] = best;
            crow[static_cast<std::size_t>(b)] = best_l;
        }
    }
    out.q = out.gain[static_cast<std::size_t>(m.root)][0];
    out.stats = block_policy_stats(bm, out.policy);
    return out;
}

PolicyStats block_policy_stats(const BlockModel& bm, const BlockPolicy& policy) {
    const ArmModel& m = bm.base;
    const std::size_t n = static_cast<std::size_t>(m.num_states());
    if (policy.choice.size() != n)
        throw std::invalid_argument("block_policy_stats: policy does not cover the model's states");
    const int blocks = policy.block_count;

    PolicyStats s;
    s.w.assign(n, 0.0);
    s.z.assign(n, 0.0);
    s.w[static_cast<std::size_t>(m.root)] = 1.0;

    // Reach probability over (state, block); a zero choice forwards the mass
    // one block, a burst spreads it over the l-step transition law.
    const std::size_t stride = static_cast<std::size_t>(blocks) + 1;
    std::vector<double> w(n * stride, 0.0);
    w[static_cast<std::size_t>(m.root) * stride] = 1.0;

    for (StateId u = 0; u < m.num_states(); ++u) {
        const auto ui = static_cast<std::size_t>(u);
        const auto& crow = policy.choice[ui];
        if (static_cast<int>(crow.size()) != blocks)
            throw std::invalid_argument("block_policy_stats: choice row does not match block_count");
        double* row = w.data() + ui * stride;
        for (int b = 0; b < blocks; ++b) {
            const double wu = row[static_cast<std::size_t>(b)];
            if (wu <= 0.0) continue;
            const int l = crow[static_cast<std::size_t>(b)];
            if (l == 0) {
                row[static_cast<std::size_t>(b) + 1] += wu;
                continue;
            }
            if (l < 0 || l > bm.allowed(u))
                throw std::invalid_argument(
                    "block_policy_stats: burst exceeds the model's feedback-free depth");
            s.z[ui] += wu;
            s.plays += wu * static_cast<double>(l);
            s.play_reward += wu * bm.burst_reward(u, l);
            for (const BlockTransition& t : bm.trans[ui][static_cast<std::size_t>(l)]) {
                w[static_cast<std::size_t>(t.to) * stride + static_cast<std::size_t>(b) + 1] +=
                    wu * t.prob;
                s.w[static_cast<std::size_t>(t.to)] += wu * t.prob;
            }
        }
    }
    s.reward = s.play_reward;
    return s;
}

PolicyStats block_policy_stats(const BlockModel& bm, const MixedPolicy<BlockPolicy>& policy) {
    PolicyStats total;
    const std::size_t n = static_cast<std::size_t>(bm.base.num_states());
    total.w.assign(n, 0.0);
    total.z.assign(n, 0.0);
    for (const auto& br : policy.branches) {
        PolicyStats s = block_policy_stats(bm, br.policy);
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

BlockPolicy delay_free_transform(const BlockPolicy& policy, double r_param) {
    if (r_param <= 0.0)
        throw std::invalid_argument("delay_free_transform: r must be > 0");
    BlockPolicy out = policy;
    if (policy.delay == 0) return out;  // undelayed arm: nothing to transform
    out.mode = BlockPolicy::Mode::DelayFreeAfterSwitch;
    out.r_param = r_param;
    out.switch_after_plays =
        static_cast<long>(std::ceil(r_param * static_cast<double>(policy.delay)));
    if (out.switch_after_plays < 1) out.switch_after_plays = 1;
    return out;
}

BlockPolicy block_compaction_transform(const BlockPolicy& policy, int horizon, double rho) {
    if (rho <= 1.0)
        throw std::invalid_argument("block_compaction_transform: rho must be > 1");
    if (!compaction_hypothesis(horizon, policy.delay))
        throw std::domain_error(
            "block_compaction_transform: horizon shorter than 21*(2*delay+1)*(1+log2(delay)); "
            "use the delay-free small-delay path instead");
    BlockPolicy out = policy;
    out.mode = BlockPolicy::Mode::Compacted;
    out.rho = rho;
    return out;
}

DelayedSolution solve_delayed(const std::vector<ArmModel>& arms, int plays_per_slot,
                              int horizon, double eps, DelayRegime regime) {
    const int n = static_cast<int>(arms.size());
    if (n < 1) throw std::invalid_argument("solve_delayed: need at least one arm");
    if (plays_per_slot < 1)
        throw std::invalid_argument("solve_delayed: plays_per_slot must be >= 1");
    if (horizon < 1) throw std::invalid_argument("solve_delayed: horizon must be >= 1");
    int max_delay = 0;
    for (const ArmModel& a : arms) {
        if (a.delay < 0) throw std::invalid_argument("solve_delayed: negative delay");
        max_delay = std::max(max_delay, a.delay);
    }

    DelayedSolution sol;
    sol.blocks.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        sol.blocks.push_back(
            block_model(arms[static_cast<std::size_t>(i)], arms[static_cast<std::size_t>(i)].delay, horizon));

    const LambdaOracleT<BlockPolicy> oracle = [&](double lambda) {
        BlockOracleEval ev;
        ev.policies.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            BlockGainResult g = block_gain_dp(sol.blocks[static_cast<std::size_t>(i)], lambda, plays_per_slot);
            ev.value += g.q;
            ev.consumption += g.stats.plays;
            ev.policies.push_back(std::move(g.policy));
        }
        return ev;
    };
    sol.dual = coupled_lagrangian_search<BlockPolicy>(
        oracle, n, static_cast<double>(plays_per_slot) * static_cast<double>(horizon), eps);
    sol.dual_bound = sol.dual.dual_bound;

    // Priority order comes from the untransformed block mixes: the execution
    // transforms change packaging, not which arm earns more per play.
    {
        std::vector<PolicyStats> stats;
        stats.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            stats.push_back(block_policy_stats(sol.blocks[static_cast<std::size_t>(i)],
                                               sol.dual.policies[static_cast<std::size_t>(i)]));
        sol.order = order_by_ratio(stats);
    }

    DelayRegime resolved = regime;
    if (resolved == DelayRegime::Auto) {
        if (static_cast<double>(max_delay) <=
            std::sqrt(static_cast<double>(horizon)) / 50.0) {
            resolved = DelayRegime::Small;
        } else {
            bool ok = true;
            for (const ArmModel& a : arms) ok = ok && compaction_hypothesis(horizon, a.delay);
            if (!ok)
                throw std::domain_error(
                    "solve_delayed: delays too large for the delay-free path and horizon too "
                    "short for compaction");
            resolved = DelayRegime::Large;
        }
    }
    sol.regime = resolved;

    sol.run_policies = sol.dual.policies;
    if (resolved == DelayRegime::Small) {
        if (max_delay == 0) {
            sol.alpha = 1.0;  // undelayed: run the block mixes as they are
        } else {
            const double r = std::sqrt(static_cast<double>(horizon)) / (2.0 * max_delay);
            const double gamma = 4.0 * r * static_cast<double>(max_delay) *
                                 static_cast<double>(max_delay) / static_cast<double>(horizon);
            if (gamma >= 1.0)
                throw std::domain_error(
                    "solve_delayed: small regime forced with delays too long for the horizon");
            sol.r_param = r;
            sol.gamma = gamma;
            sol.alpha = (1.0 - gamma) / (1.0 + 1.0 / r);
            for (auto& mp : sol.run_policies)
                for (auto& br : mp.branches) {
                    br.policy = delay_free_transform(br.policy, r);
                    br.policy.gamma = gamma;
                }
        }
    } else {
        for (const ArmModel& a : arms)
            if (a.budget)
                throw std::invalid_argument("solve_delayed: compaction does not support budgeted arms");
        const double rho = 13.0;
        const double gamma = 1.0 / 3.0;
        sol.rho = rho;
        sol.gamma = gamma;
        sol.alpha = (1.0 - gamma) / rho;
        for (auto& mp : sol.run_policies)
            for (auto& br : mp.branches) {
                br.policy = block_compaction_transform(br.policy, horizon, rho);
                br.policy.gamma = gamma;
            }
    }
    return sol;
}

std::vector<int> delayed_ranked_order(const std::vector<ArmModel>& arms,
                                      const std::vector<MixedBlockPolicy>& policies,
                                      int horizon) {
    if (policies.size() != arms.size())
        throw std::invalid_argument("delayed_ranked_order: |arms| != |policies|");
    std::vector<PolicyStats> stats;
    stats.reserve(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const BlockModel bm = block_model(arms[i], arms[i].delay, horizon);
        stats.push_back(block_policy_stats(bm, policies[i]));
    }
    return order_by_ratio(stats);
}

namespace {

// Per-arm runtime of the delayed scheduler: the lagged policy simulation, the
// backlog of committed-but-unmade real plays, and the outcome transport from
// real plays (pending until delivered, then known until consumed).
struct DelayedArmRun {
    // policy simulation
    StateId sigma = 0;
    int b = 0;             // block index into the policy table
    int burst_left = 0;    // outcomes needed to finish the committed burst
    long committed = 0;    // plays committed by the simulation so far
    bool df = false;       // delay-free mode active
    bool passive = false;
    // real plays
    long real_due = 0;     // committed plays not yet made
    long real_plays = 0;
    StateId real_cursor = 0;
    bool cursor_lost = false;  // real walk left the modeled prefix
    // outcome transport
    std::deque<std::pair<double, int>> pending;  // (value, delivery slot)
    std::deque<double> known;
    // compaction bookkeeping
    std::multiset<int> stash;  // size classes owed a zero-cost replay
    long sim_blocks = 0;
    long real_blocks = 0;
};

} // namespace

EpisodeResult run_delayed(const std::vector<ArmModel>& arms,
                          const std::vector<MixedBlockPolicy>& policies,
                          const DelayedRunConfig& cfg, std::uint64_t seed,
                          std::uint64_t episode, DelayedAudit* audit) {
    const int n = static_cast<int>(arms.size());
    if (policies.size() != arms.size())
        throw std::invalid_argument("run_delayed: |arms| != |policies|");
    if (cfg.plays_per_slot < 1) throw std::invalid_argument("run_delayed: K < 1");
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("run_delayed: alpha outside (0,1]");
    for (const auto& mp : policies)
        if (mp.branches.empty()) throw std::invalid_argument("run_delayed: empty policy mix");

    std::vector<int> order;
    if (!cfg.order.empty()) {
        order = cfg.order;
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        if (static_cast<int>(order.size()) != n)
            throw std::invalid_argument("run_delayed: order is not a permutation");
        for (int i : order) {
            if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
                throw std::invalid_argument("run_delayed: order is not a permutation");
            seen[static_cast<std::size_t>(i)] = 1;
        }
    } else {
        order = delayed_ranked_order(arms, policies, cfg.horizon);
    }

    // Lane 0: arm parameters, then participation coins, then branch coins,
    // always in arm index order and always one coin per arm.
    RngStream setup = RngStream::substream(seed, episode, 0);
    std::vector<ArmSampler> samplers;
    samplers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) samplers.emplace_back(arms[static_cast<std::size_t>(i)], setup);
    std::vector<char> participates(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        participates[static_cast<std::size_t>(i)] = setup.next_double() < cfg.alpha ? 1 : 0;
    std::vector<const BlockPolicy*> resolved(static_cast<std::size_t>(n), nullptr);
    for (int i = 0; i < n; ++i)
        resolved[static_cast<std::size_t>(i)] =
            &policies[static_cast<std::size_t>(i)].resolve(setup.next_double());

    std::vector<RngStream> lanes;
    lanes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        lanes.push_back(RngStream::substream(seed, episode, static_cast<std::uint64_t>(i) + 1));

    for (int i = 0; i < n; ++i) {
        const auto ai = static_cast<std::size_t>(i);
        const BlockPolicy& pol = *resolved[ai];
        if (pol.delay != arms[ai].delay)
            throw std::invalid_argument("run_delayed: policy delay does not match the arm");
        if (pol.choice.size() != static_cast<std::size_t>(arms[ai].num_states()))
            throw std::invalid_argument("run_delayed: policy does not cover the arm's states");
        if (pol.mode == BlockPolicy::Mode::Compacted && arms[ai].budget)
            throw std::invalid_argument("run_delayed: compaction does not support budgeted arms");
    }

    EpisodeResult ep;
    ep.plays_per_arm.assign(static_cast<std::size_t>(n), 0);

    std::vector<DelayedArmRun> st(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto ai = static_cast<std::size_t>(i);
        st[ai].sigma = arms[ai].root;
        st[ai].real_cursor = arms[ai].root;
        st[ai].passive = !participates[ai];
    }

    // Move delivered outcomes to the known queue, feed the simulation, and
    // commit bursts until the simulation waits on feedback or quits.
    auto advance = [&](int i, int slot) {
        const auto ai = static_cast<std::size_t>(i);
        DelayedArmRun& a = st[ai];
        while (!a.pending.empty() && a.pending.front().second < slot) {
            a.known.push_back(a.pending.front().first);
            a.pending.pop_front();
        }
        if (a.passive) return;
        const ArmModel& m = arms[ai];
        const BlockPolicy& pol = *resolved[ai];
        for (;;) {
            if (a.burst_left > 0) {
                if (a.known.empty()) return;  // feedback still in flight
                const double q = a.known.front();
                a.known.pop_front();
                const StateId v = m.child_on(a.sigma, q);
                if (v < 0)
                    throw std::logic_error("run_delayed: observation has no matching edge");
                a.sigma = v;
                if (--a.burst_left == 0) ++a.b;
                continue;
            }
            // Decision point: the previous burst is fully absorbed.
            if (!a.df && pol.mode == BlockPolicy::Mode::DelayFreeAfterSwitch &&
                a.committed >= pol.switch_after_plays)
                a.df = true;
            int l = 0;
            if (a.b < pol.block_count && m.state(a.sigma).playable)
                l = pol.burst(a.sigma, a.b);
            if (l <= 0) {
                a.passive = true;  // the policy quit (zero choices never resume)
                return;
            }
            ++a.sim_blocks;
            a.committed += l;
            a.burst_left = l;
            if (a.df) continue;  // extra plays flow every slot; nothing to schedule
            if (pol.mode == BlockPolicy::Mode::Compacted &&
                static_cast<double>(l) * pol.rho > static_cast<double>(pol.delay)) {
                a.df = true;  // burst too large to amplify: go delay-free
                continue;
            }
            if (pol.mode == BlockPolicy::Mode::Compacted) {
                const int cls = std::bit_width(static_cast<unsigned>(l)) - 1;
                auto it = a.stash.find(cls);
                if (it != a.stash.end()) {
                    a.stash.erase(it);
                    // Replayed from stashed surplus: zero real plays and zero
                    // slots; the outcomes owed must already cover the burst.
                    if (static_cast<long>(a.known.size() + a.pending.size()) + a.real_due <
                        a.burst_left)
                        throw std::logic_error("run_delayed: stash cannot cover the burst");
                    continue;
                }
                a.real_due += std::llround(pol.rho * static_cast<double>(l));
                for (int c = 0; c < 6; ++c) a.stash.insert(cls);
                ++a.real_blocks;
                continue;
            }
            a.real_due += l;  // block mode: the burst is played one slot at a time
            ++a.real_blocks;
            continue;
        }
    };

    // Whether a delay-free arm can still physically play: its walk sampler
    // must have outcomes left, and a budgeted arm must not have run past the
    // playable states that encode its budget.
    auto can_extra_play = [&](int i) {
        const auto ai = static_cast<std::size_t>(i);
        const DelayedArmRun& a = st[ai];
        if (samplers[ai].exhausted()) return false;
        if (arms[ai].budget &&
            (a.cursor_lost || !arms[ai].state(a.real_cursor).playable))
            return false;
        return true;
    };

    auto play_one = [&](int i, int slot) {
        const auto ai = static_cast<std::size_t>(i);
        DelayedArmRun& a = st[ai];
        const ArmModel& m = arms[ai];
        const BlockPolicy& pol = *resolved[ai];
        // Burst capping guarantees committed block plays stay on playable
        // states; only delay-free extras and amplified surplus may walk past
        // the modeled prefix.
        const bool strict = !a.df && pol.mode != BlockPolicy::Mode::Compacted;
        if (!a.cursor_lost && !m.state(a.real_cursor).playable) {
            if (strict)
                throw std::logic_error("run_delayed: committed play at an unplayable state");
            a.cursor_lost = true;
        }
        const double q = samplers[ai].draw(lanes[ai]);
        if (!a.cursor_lost) {
            const StateId v = m.child_on(a.real_cursor, q);
            if (v < 0) {
                if (strict)
                    throw std::logic_error("run_delayed: real play has no matching edge");
                a.cursor_lost = true;
            } else {
                a.real_cursor = v;
            }
        }
        a.pending.push_back({q, slot + m.delay});  // usable from slot + delay + 1
        if (!a.df) --a.real_due;
        ++a.real_plays;
        ++ep.plays_per_arm[ai];
        ep.total_reward += q;
        ep.trace.push_back({slot, i, q, true});
    };

    for (int slot = 0; slot < cfg.horizon; ++slot) {
        for (int i = 0; i < n; ++i) advance(i, slot);
        int plays_this_slot = 0;
        for (int pos = 0; pos < n && plays_this_slot < cfg.plays_per_slot; ++pos) {
            const int arm = order[static_cast<std::size_t>(pos)];
            DelayedArmRun& a = st[static_cast<std::size_t>(arm)];
            if (a.passive) continue;
            if (a.df) {
                if (!can_extra_play(arm)) {
                    a.passive = true;  // nothing left to play; scan continues
                    continue;
                }
                play_one(arm, slot);
                ++plays_this_slot;
            } else if (a.real_due > 0) {
                if (samplers[static_cast<std::size_t>(arm)].exhausted()) {
                    // The walk ended mid-schedule (amplified surplus overran
                    // the model): forfeit the remaining plays.
                    a.real_due = 0;
                    if (a.pending.empty() && a.known.empty()) a.passive = true;
                    continue;
                }
                play_one(arm, slot);
                ++plays_this_slot;
            }
            // else: waiting on feedback; the scan moves on without spending a play.
        }
        if (plays_this_slot == 0) {
            // Legal only while feedback is in flight; otherwise every arm is
            // done and the episode ends early.
            bool future = false;
            for (int i = 0; i < n; ++i) {
                DelayedArmRun& a = st[static_cast<std::size_t>(i)];
                if (a.passive) continue;
                if (!a.pending.empty() || a.real_due > 0) {
                    future = true;
                    continue;
                }
                if (samplers[static_cast<std::size_t>(i)].exhausted()) {
                    a.passive = true;  // supply ended mid-burst: the arm is done
                    continue;
                }
                throw std::logic_error("run_delayed: arm stalled with no feedback in flight");
            }
            if (!future) break;
        }
    }

    if (audit) {
        audit->sim_blocks.assign(static_cast<std::size_t>(n), 0);
        audit->real_blocks.assign(static_cast<std::size_t>(n), 0);
        audit->real_plays.assign(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            const auto ai = static_cast<std::size_t>(i);
            audit->sim_blocks[ai] = st[ai].sim_blocks;
            audit->real_blocks[ai] = st[ai].real_blocks;
            audit->real_plays[ai] = st[ai].real_plays;
        }
    }
    return ep;
}

} // namespace fhbandit
