#include "fhbandit/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhbandit {

namespace {
constexpr double kDistTol = 1e-9;
}

void validate_metric(const MetricSpec& metric, int n_arms) {
    const auto& d = metric.distances;
    if (static_cast<int>(d.size()) != n_arms)
        throw std::invalid_argument("validate_metric: matrix size != arm count");
    for (const auto& row : d)
        if (static_cast<int>(row.size()) != n_arms)
            throw std::invalid_argument("validate_metric: matrix is not square");
    for (int i = 0; i < n_arms; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (d[ii][ii] != 0.0)
            throw std::invalid_argument("validate_metric: nonzero diagonal");
        for (int j = 0; j < n_arms; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            if (d[ii][jj] < 0.0)
                throw std::invalid_argument("validate_metric: negative distance");
            if (std::fabs(d[ii][jj] - d[jj][ii]) > kDistTol)
                throw std::invalid_argument("validate_metric: asymmetric distance");
            for (int k = 0; k < n_arms; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                if (d[ii][kk] > d[ii][jj] + d[jj][kk] + kDistTol)
                    throw std::invalid_argument("validate_metric: triangle inequality violated");
            }
        }
    }
    if (metric.start < 0 || metric.start >= n_arms)
        throw std::invalid_argument("validate_metric: start out of range");
    if (metric.travel_budget < 0.0)
        throw std::invalid_argument("validate_metric: negative travel budget");
}

namespace {

// Best extra reward collectable from `loc` with `rem` budget over nodes not
// in `visited`.  Plain exhaustive search; used only for path reconstruction.
double max_extension(const std::vector<std::vector<double>>& d,
                     const std::vector<double>& rewards, int loc, unsigned visited,
                     double rem) {
    const int n = static_cast<int>(rewards.size());
    double best = 0.0;
    for (int k = 0; k < n; ++k) {
        if (visited & (1u << static_cast<unsigned>(k))) continue;
        const double step = d[static_cast<std::size_t>(loc)][static_cast<std::size_t>(k)];
        if (step > rem + kDistTol) continue;
        best = std::max(best, rewards[static_cast<std::size_t>(k)] +
                                  max_extension(d, rewards, k, visited | (1u << static_cast<unsigned>(k)),
                                                rem - step));
    }
    return best;
}

} // namespace

OrienteeringResult orienteering_exact(const MetricSpec& metric,
                                      const std::vector<double>& node_rewards) {
    const int n = static_cast<int>(node_rewards.size());
    validate_metric(metric, n);
    if (n > 20) throw std::invalid_argument("orienteering_exact: more than 20 nodes");
    for (double r : node_rewards)
        if (r < 0.0) throw std::invalid_argument("orienteering_exact: negative node reward");

    const auto& d = metric.distances;
    const int start = metric.start;
    const double L = metric.travel_budget;
    const unsigned full = 1u << static_cast<unsigned>(n);
    const double inf = std::numeric_limits<double>::infinity();

    // minlen[S][j]: shortest path from start visiting exactly S, ending at j.
    std::vector<std::vector<double>> minlen(full, std::vector<double>(static_cast<std::size_t>(n), inf));
    minlen[1u << static_cast<unsigned>(start)][static_cast<std::size_t>(start)] = 0.0;

    double best = node_rewards[static_cast<std::size_t>(start)];
    for (unsigned S = 1; S < full; ++S) {
        if (!(S & (1u << static_cast<unsigned>(start)))) continue;
        double set_reward = -1.0;
        for (int j = 0; j < n; ++j) {
            const double len = minlen[S][static_cast<std::size_t>(j)];
            if (len > L + kDistTol) continue;  // infeasible prefixes can't recover
            if (set_reward < 0.0) {
                set_reward = 0.0;
                for (int i = 0; i < n; ++i)
                    if (S & (1u << static_cast<unsigned>(i)))
                        set_reward += node_rewards[static_cast<std::size_t>(i)];
            }
            best = std::max(best, set_reward);
            for (int k = 0; k < n; ++k) {
                if (S & (1u << static_cast<unsigned>(k))) continue;
                const double nl = len + d[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                auto& slot = minlen[S | (1u << static_cast<unsigned>(k))][static_cast<std::size_t>(k)];
                if (nl < slot) slot = nl;
            }
        }
    }

    // Lexicographically least optimal path: stopping precedes any extension,
    // otherwise take the smallest next node from which `best` stays reachable.
    OrienteeringResult res;
    res.value = best;
    res.path = {start};
    unsigned visited = 1u << static_cast<unsigned>(start);
    int loc = start;
    double len = 0.0;
    double val = node_rewards[static_cast<std::size_t>(start)];
    while (val < best - kDistTol) {
        bool extended = false;
        for (int k = 0; k < n && !extended; ++k) {
            if (visited & (1u << static_cast<unsigned>(k))) continue;
            const double nl = len + d[static_cast<std::size_t>(loc)][static_cast<std::size_t>(k)];
            if (nl > L + kDistTol) continue;
            const double extra = max_extension(d, node_rewards, k,
                                               visited | (1u << static_cast<unsigned>(k)), L - nl);
            if (val + node_rewards[static_cast<std::size_t>(k)] + extra >= best - kDistTol) {
                res.path.push_back(k);
                visited |= 1u << static_cast<unsigned>(k);
                loc = k;
                len = nl;
                val += node_rewards[static_cast<std::size_t>(k)];
                extended = true;
            }
        }
        if (!extended)
            throw std::logic_error("orienteering_exact: failed to reconstruct optimal path");
    }
    return res;
}

SwitchingSolution solve_switching(const std::vector<ArmModel>& arms,
                                  const MetricSpec& metric, int horizon, double eps,
                                  std::optional<double> alpha) {
    const int n = static_cast<int>(arms.size());
    validate_metric(metric, n);
    if (horizon <= 0) throw std::invalid_argument("solve_switching: horizon must be positive");

    LambdaOracle oracle = [&](double lambda) {
        OracleEval ev;
        ev.policies.resize(static_cast<std::size_t>(n));
        std::vector<double> q(static_cast<std::size_t>(n), 0.0);
        std::vector<double> plays(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const auto ai = static_cast<std::size_t>(i);
            GainResult g = gain_dp(arms[ai], lambda);
            q[ai] = g.q;
            plays[ai] = policy_stats(arms[ai], g.policy).plays;
            ev.policies[ai] = std::move(g.policy);
        }
        OrienteeringResult o = orienteering_exact(metric, q);
        ev.aux_order = o.path;
        ev.value = o.value;
        for (int i : o.path) ev.consumption += plays[static_cast<std::size_t>(i)];
        return ev;
    };

    LambdaSolution base = coupled_lagrangian_search(oracle, n, static_cast<double>(horizon), eps);

    SwitchingSolution out;
    out.lambda_minus = base.lambda_minus;
    out.lambda_plus = base.lambda_plus;
    out.a = base.a;
    out.dual_bound = base.dual_bound;
    out.searched = base.searched;
    out.alpha = alpha.value_or(0.5);
    if (out.alpha <= 0.0 || out.alpha > 1.0)
        throw std::invalid_argument("solve_switching: alpha outside (0,1]");
    out.minus.path = base.at_minus.aux_order;
    out.minus.policies = base.at_minus.policies;
    out.plus.path = base.at_plus.aux_order;
    out.plus.policies = base.at_plus.policies;
    return out;
}

namespace {

EpisodeResult run_switching_impl(const std::vector<ArmModel>& arms,
                                 const SwitchingBranch& branch, const SwitchingConfig& cfg,
                                 std::vector<ArmSampler>& samplers,
                                 std::vector<RngStream>& lanes,
                                 const std::vector<char>& participates) {
    const int n = static_cast<int>(arms.size());
    if (branch.policies.size() != arms.size())
        throw std::invalid_argument("run_switching: |policies| != |arms|");
    if (branch.path.empty() || branch.path.front() != cfg.metric.start)
        throw std::invalid_argument("run_switching: path must start at the metric start arm");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int armId : branch.path) {
        if (armId < 0 || armId >= n || seen[static_cast<std::size_t>(armId)])
            throw std::invalid_argument("run_switching: path revisits or exceeds arms");
        seen[static_cast<std::size_t>(armId)] = 1;
    }

    EpisodeResult ep;
    ep.plays_per_arm.assign(static_cast<std::size_t>(n), 0);
    int loc = cfg.metric.start;
    int slot = 0;

    for (int armId : branch.path) {
        if (slot >= cfg.horizon) break;
        const auto ai = static_cast<std::size_t>(armId);
        if (!participates[ai]) continue;
        ep.distance_cost += cfg.metric.distances[static_cast<std::size_t>(loc)][ai];
        if (ep.distance_cost > cfg.metric.travel_budget + kDistTol)
            throw std::logic_error("run_switching: travel budget exceeded");
        loc = armId;

        const ArmModel& model = arms[ai];
        const SingleArmPolicy& pol = branch.policies[ai];
        StateId u = model.root;
        while (slot < cfg.horizon && pol.action(u) == ArmAction::Play) {
            if (!model.state(u).playable)
                throw std::logic_error("run_switching: policy plays an unplayable state");
            const double q = samplers[ai].draw(lanes[ai]);
            const StateId v = model.child_on(u, q);
            if (v < 0) throw std::logic_error("run_switching: observation has no matching edge");
            ep.total_reward += q;
            ep.trace.push_back({slot, armId, q, true});
            ++ep.plays_per_arm[ai];
            ++slot;
            u = v;
        }
    }
    return ep;
}

struct SwitchingEpisodeSetup {
    std::vector<ArmSampler> samplers;
    std::vector<RngStream> lanes;
    std::vector<char> participates;
    double branch_coin = 0.0;
};

// Lane 0 layout: per-arm parameters, per-arm participation coins, then one
// global branch coin — identical for pure and mixed execution.
SwitchingEpisodeSetup make_switching_setup(const std::vector<ArmModel>& arms, double alpha,
                                           std::uint64_t seed, std::uint64_t episode) {
    const int n = static_cast<int>(arms.size());
    SwitchingEpisodeSetup s;
    RngStream setup = RngStream::substream(seed, episode, 0);
    s.samplers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s.samplers.emplace_back(arms[static_cast<std::size_t>(i)], setup);
    s.participates.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        s.participates[static_cast<std::size_t>(i)] = setup.next_double() < alpha ? 1 : 0;
    s.branch_coin = setup.next_double();
    s.lanes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        s.lanes.push_back(RngStream::substream(seed, episode, static_cast<std::uint64_t>(i) + 1));
    return s;
}

} // namespace

EpisodeResult run_switching(const std::vector<ArmModel>& arms,
                            const SwitchingBranch& branch, const SwitchingConfig& cfg,
                            std::uint64_t seed, std::uint64_t episode) {
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("run_switching: alpha outside (0,1]");
    auto s = make_switching_setup(arms, cfg.alpha, seed, episode);
    return run_switching_impl(arms, branch, cfg, s.samplers, s.lanes, s.participates);
}

EpisodeResult run_switching_mixed(const std::vector<ArmModel>& arms,
                                  const SwitchingSolution& solution,
                                  const SwitchingConfig& cfg, std::uint64_t seed,
                                  std::uint64_t episode) {
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("run_switching_mixed: alpha outside (0,1]");
    auto s = make_switching_setup(arms, cfg.alpha, seed, episode);
    const SwitchingBranch& br = s.branch_coin < solution.a ? solution.minus : solution.plus;
    return run_switching_impl(arms, br, cfg, s.samplers, s.lanes, s.participates);
}

} // namespace fhbandit
