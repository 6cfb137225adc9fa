#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fhbandit/lagrangian.hpp"
#include "fhbandit/oracle.hpp"
#include "fhbandit/switching.hpp"
#include "helpers.hpp"

using namespace fhbandit;
using fhtest::bernoulli_arm;
using fhtest::known_arm;

namespace {

MetricSpec unit_square_metric(std::mt19937_64& g, int n, double travel_budget) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.push_back({unit(g), unit(g)});
    MetricSpec m;
    m.distances.assign(static_cast<std::size_t>(n),
                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double dx = pts[static_cast<std::size_t>(i)].first -
                        pts[static_cast<std::size_t>(j)].first;
            double dy = pts[static_cast<std::size_t>(i)].second -
                        pts[static_cast<std::size_t>(j)].second;
            m.distances[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                std::sqrt(dx * dx + dy * dy);
        }
    m.start = 0;
    m.travel_budget = travel_budget;
    return m;
}

// Reference orienteering value: max over feasible prefixes of every
// permutation of the non-start nodes.
double brute_orienteering(const MetricSpec& m, const std::vector<double>& rewards) {
    const int n = static_cast<int>(rewards.size());
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (i != m.start) rest.push_back(i);
    std::sort(rest.begin(), rest.end());
    double best = rewards[static_cast<std::size_t>(m.start)];
    do {
        double len = 0.0;
        double val = rewards[static_cast<std::size_t>(m.start)];
        int at = m.start;
        for (int nxt : rest) {
            len += m.distances[static_cast<std::size_t>(at)][static_cast<std::size_t>(nxt)];
            if (len > m.travel_budget + 1e-12) break;
            val += rewards[static_cast<std::size_t>(nxt)];
            at = nxt;
            best = std::max(best, val);
        }
        best = std::max(best, val);
    } while (std::next_permutation(rest.begin(), rest.end()));
    return best;
}

} // namespace

TEST_SUITE("switching") {

TEST_CASE("metric validation") {
    MetricSpec m;
    m.distances = {{0, 1}, {1, 0}};
    m.start = 0;
    m.travel_budget = 1;
    CHECK_NOTHROW(validate_metric(m, 2));
    CHECK_THROWS_AS(validate_metric(m, 3), std::invalid_argument);

    MetricSpec diag = m;
    diag.distances[1][1] = 0.5;
    CHECK_THROWS_AS(validate_metric(diag, 2), std::invalid_argument);

    MetricSpec asym = m;
    asym.distances[0][1] = 2.0;
    CHECK_THROWS_AS(validate_metric(asym, 2), std::invalid_argument);

    MetricSpec tri;
    tri.distances = {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}};  // 5 > 1 + 1
    tri.start = 0;
    tri.travel_budget = 1;
    CHECK_THROWS_AS(validate_metric(tri, 3), std::invalid_argument);
}

TEST_CASE("orienteering hand instance") {
    MetricSpec m;
    m.distances = {{0, 1, 2}, {1, 0, 2}, {2, 2, 0}};
    m.start = 0;
    m.travel_budget = 2.0;
    OrienteeringResult r = orienteering_exact(m, {0.2, 1.0, 1.5});
    CHECK(r.value == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(r.path == std::vector<int>{0, 2});
}

TEST_CASE("orienteering degenerate budgets") {
    MetricSpec m;
    m.distances = {{0, 1, 2}, {1, 0, 2}, {2, 2, 0}};
    m.start = 0;
    m.travel_budget = 0.0;
    OrienteeringResult r = orienteering_exact(m, {0.4, 1.0, 1.5});
    CHECK(r.path == std::vector<int>{0});
    CHECK(r.value == doctest::Approx(0.4).epsilon(1e-12));

    m.travel_budget = 10.0;
    OrienteeringResult zero = orienteering_exact(m, {0.0, 0.0, 0.0});
    CHECK(zero.value == 0.0);
    CHECK(zero.path == std::vector<int>{0});  // ties prefer stopping early
}

TEST_CASE("orienteering equals permutation brute force on random metrics") {
    std::mt19937_64 g(404);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        const int n = 4 + static_cast<int>(g() % 5);  // 4..8 nodes
        MetricSpec m = unit_square_metric(g, n, 0.0);
        m.travel_budget = unit(g) * 2.0;
        std::vector<double> rewards;
        for (int i = 0; i < n; ++i) rewards.push_back(unit(g));
        OrienteeringResult r = orienteering_exact(m, rewards);
        CAPTURE(it);
        CHECK(r.value == doctest::Approx(brute_orienteering(m, rewards)).epsilon(1e-9));
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < r.path.size(); ++i)
            len += m.distances[static_cast<std::size_t>(r.path[i])]
                              [static_cast<std::size_t>(r.path[i + 1])];
        CHECK(len <= m.travel_budget + 1e-9);
    }
}

TEST_CASE("slack travel budget reduces to the base dual") {
    std::vector<ArmModel> arms = {build_beta_bernoulli(1, 1, 3), bernoulli_arm(0.4, 3),
                                  build_beta_bernoulli(1, 2, 3)};
    std::mt19937_64 g(11);
    MetricSpec metric = unit_square_metric(g, 3, 0.0);
    double total = 0.0;
    for (const auto& row : metric.distances)
        for (double d : row) total += d;
    metric.travel_budget = total;  // every permutation is feasible
    SwitchingSolution sw = solve_switching(arms, metric, 3, 0.05);
    LambdaSolution base =
        coupled_lagrangian_search<SingleArmPolicy>(make_base_oracle(arms), 3, 3.0, 0.05);
    CHECK(sw.dual_bound == doctest::Approx(base.dual_bound).epsilon(1e-9));
}

TEST_CASE("zero travel budget reduces to the start arm alone") {
    std::vector<ArmModel> arms = {build_beta_bernoulli(1, 1, 3), known_arm(0.9, 3)};
    MetricSpec metric;
    metric.distances = {{0, 1}, {1, 0}};
    metric.start = 0;
    metric.travel_budget = 0.0;
    SwitchingSolution sw = solve_switching(arms, metric, 3, 0.05);
    // Same search over the start arm alone; n = 2 keeps the solver's internal
    // gap tolerance identical so the duals match bit-for-bit.
    std::vector<ArmModel> only = {arms[0]};
    LambdaSolution single =
        coupled_lagrangian_search<SingleArmPolicy>(make_base_oracle(only), 2, 3.0, 0.05);
    CHECK(sw.dual_bound == doctest::Approx(single.dual_bound).epsilon(1e-9));
    CHECK(sw.minus.path == std::vector<int>{0});
}

TEST_CASE("dual bound dominates the exact switching optimum") {
    std::vector<ArmModel> arms = {build_beta_bernoulli(1, 1, 3),
                                  build_beta_bernoulli(1, 2, 3), bernoulli_arm(0.3, 3)};
    MetricSpec metric;
    metric.distances = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    metric.start = 0;
    metric.travel_budget = 1.0;
    SwitchingSolution sw = solve_switching(arms, metric, 3, 0.05);
    double opt = exact_switching_opt(arms, metric.distances, metric.start, 1.0, 3);
    CHECK(sw.dual_bound >= opt - 1e-9);
    CHECK(sw.alpha == 0.5);
}

TEST_CASE("switching executor respects the travel budget on every episode") {
    std::mt19937_64 g(21);
    std::vector<ArmModel> arms;
    for (int i = 0; i < 4; ++i) arms.push_back(fhtest::random_model(g, 4));
    MetricSpec metric = unit_square_metric(g, 4, 0.0);
    metric.travel_budget = 1.0;
    SwitchingSolution sw = solve_switching(arms, metric, 4, 0.05);
    SwitchingConfig cfg;
    cfg.horizon = 4;
    cfg.metric = metric;
    cfg.alpha = sw.alpha;
    for (std::uint64_t ep = 0; ep < 300; ++ep) {
        EpisodeResult res = run_switching_mixed(arms, sw, cfg, 33, ep);
        CHECK(res.distance_cost <= metric.travel_budget + 1e-12);
        CHECK(res.trace.size() <= 4);
    }
}

TEST_CASE("executor on trivial branches") {
    std::vector<ArmModel> arms = {known_arm(1.0, 2), known_arm(1.0, 2)};
    MetricSpec metric;
    metric.distances = {{0, 0.5}, {0.5, 0}};
    metric.start = 0;
    metric.travel_budget = 1.0;
    SwitchingConfig cfg;
    cfg.horizon = 4;
    cfg.metric = metric;
    cfg.alpha = 1.0;

    SwitchingBranch stopped;
    stopped.path = {0};
    stopped.policies = {SingleArmPolicy::all_stop(arms[0]),
                        SingleArmPolicy::all_stop(arms[1])};
    EpisodeResult quiet = run_switching(arms, stopped, cfg, 3, 0);
    CHECK(quiet.total_reward == 0.0);
    CHECK(quiet.distance_cost == 0.0);

    // Two deterministic arms, each truncated to 2 plays: total 4 plays = T.
    SwitchingBranch both;
    both.path = {0, 1};
    for (const ArmModel& m : arms) {
        SingleArmPolicy p = SingleArmPolicy::all_stop(m);
        for (StateId u = 0; u < m.num_states(); ++u)
            if (m.state(u).playable) p.act[static_cast<std::size_t>(u)] = ArmAction::Play;
        both.policies.push_back(truncate_to_plays(m, p, 2));
    }
    EpisodeResult full = run_switching(arms, both, cfg, 3, 0);
    CHECK(full.total_reward == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(full.distance_cost == doctest::Approx(0.5).epsilon(1e-12));
}

} // TEST_SUITE
