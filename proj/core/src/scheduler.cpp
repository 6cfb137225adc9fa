#include "fhbandit/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fhbandit {

std::vector<int> order_by_ratio(const std::vector<PolicyStats>& stats) {
    const int n = static_cast<int>(stats.size());
    std::vector<double> ratio(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& s = stats[static_cast<std::size_t>(i)];
        ratio[static_cast<std::size_t>(i)] =
            s.plays > 0.0 ? s.reward / s.plays : -std::numeric_limits<double>::infinity();
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

std::vector<int> ranked_order(const std::vector<ArmModel>& arms,
                              const std::vector<MixedArmPolicy>& policies) {
    std::vector<PolicyStats> stats;
    stats.reserve(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i)
        stats.push_back(policy_stats(arms[i], policies[i]));
    return order_by_ratio(stats);
}

EpisodeResult run_combined(const std::vector<ArmModel>& arms,
                           const std::vector<MixedArmPolicy>& policies,
                           const ScheduleConfig& cfg,
                           std::uint64_t seed, std::uint64_t episode) {
    const int n = static_cast<int>(arms.size());
    if (policies.size() != arms.size())
        throw std::invalid_argument("run_combined: |arms| != |policies|");
    if (cfg.plays_per_slot < 1) throw std::invalid_argument("run_combined: K < 1");
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("run_combined: alpha outside (0,1]");

    std::vector<int> order;
    if (cfg.given_order) {
        order = *cfg.given_order;
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        if (static_cast<int>(order.size()) != n)
            throw std::invalid_argument("run_combined: order is not a permutation");
        for (int i : order) {
            if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
                throw std::invalid_argument("run_combined: order is not a permutation");
            seen[static_cast<std::size_t>(i)] = 1;
        }
    } else {
        order = ranked_order(arms, policies);
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
        int plays_this_slot = 0;
        for (int pos = 0; pos < n && plays_this_slot < cfg.plays_per_slot; ++pos) {
            const int arm = order[static_cast<std::size_t>(pos)];
            const auto ai = static_cast<std::size_t>(arm);
            if (retired[ai]) continue;
            const ArmModel& model = arms[ai];
            const StateId u = cursor[ai];
            if (resolved[ai]->action(u) != ArmAction::Play) {
                retired[ai] = 1;  // quit without consuming the slot; scan continues
                continue;
            }
            if (!model.state(u).playable)
                throw std::logic_error("run_combined: policy plays an unplayable state");
            const double q = samplers[ai].draw(lanes[ai]);
            const StateId v = model.child_on(u, q);
            if (v < 0) throw std::logic_error("run_combined: observation has no matching edge");
            cursor[ai] = v;
            ++ep.plays_per_arm[ai];
            ++plays_this_slot;
            ep.total_reward += q;
            ep.trace.push_back({slot, arm, q, true});
        }
        if (plays_this_slot == 0) break;  // everyone retired
    }

    // Feasibility: each arm's plays occupy consecutive slots, one per slot
    // (irrevocability — an arm never pauses or resumes).
    std::vector<int> last_slot(static_cast<std::size_t>(n), -2);
    for (const auto& rec : ep.trace) {
        auto& prev = last_slot[static_cast<std::size_t>(rec.arm)];
        if (prev != -2 && rec.slot != prev + 1)
            throw std::logic_error("run_combined: non-contiguous plays for an arm");
        prev = rec.slot;
    }
    return ep;
}

} // namespace fhbandit
