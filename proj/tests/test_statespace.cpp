#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fhbandit/statespace.hpp"
#include "helpers.hpp"

using namespace fhbandit;

TEST_SUITE("statespace") {

TEST_CASE("beta-bernoulli root posterior mean") {
    ArmModel m = build_beta_bernoulli(1, 1, 1);
    CHECK(m.state(m.root).reward == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.state(m.root).playable);
    REQUIRE(m.state(m.root).edges.size() == 2);
    CHECK(m.state(m.root).edges[0].value == 0.0);
    CHECK(m.state(m.root).edges[1].value == 1.0);
}

TEST_CASE("beta-bernoulli posterior updates") {
    ArmModel m = build_beta_bernoulli(1, 1, 2);
    StateId s10 = m.child_on(m.root, 1.0);
    StateId s01 = m.child_on(m.root, 0.0);
    REQUIRE(s10 >= 0);
    REQUIRE(s01 >= 0);
    CHECK(m.state(s10).reward == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.state(s01).reward == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.state(s10).depth == 1);
    CHECK(m.state(s10).observed_sum == 1.0);
}

TEST_CASE("budget truncation marks states unplayable") {
    ArmModel m = build_beta_bernoulli(1, 1, 2, 1.0);
    StateId s10 = m.child_on(m.root, 1.0);
    StateId s01 = m.child_on(m.root, 0.0);
    CHECK_FALSE(m.state(s10).playable);  // one observed success hits the budget
    CHECK(m.state(s01).playable);
    CHECK(m.state(m.root).playable);  // budgets never remove the root
}

TEST_CASE("builder input validation") {
    CHECK_THROWS_AS(build_beta_bernoulli(0, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_beta_bernoulli(1, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_beta_bernoulli(1, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_mixture_bernoulli({}, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_mixture_bernoulli({{0.5, 0.5}}, 2), std::invalid_argument);
}

TEST_CASE("two-type mixture posterior collapses after a success") {
    // Type I: success probability 1/2 with weight 1/4; type II: always 0.
    ArmModel m = build_mixture_bernoulli({{0.25, 0.5}, {0.75, 0.0}}, 2);
    CHECK(m.state(m.root).reward == doctest::Approx(0.125).epsilon(1e-15));
    StateId s1 = m.child_on(m.root, 1.0);
    REQUIRE(s1 >= 0);
    // Type II never emits 1, so one success identifies type I.
    CHECK(m.state(s1).reward == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("degenerate mixture is a known arm") {
    ArmModel m = build_mixture_bernoulli({{1.0, 0.3}}, 3);
    for (StateId u = 0; u < m.num_states(); ++u)
        CHECK(m.state(u).reward == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("martingale validation accepts exact models") {
    ValidationReport rep = validate_martingale(build_beta_bernoulli(1, 1, 5));
    CHECK(rep.passed);
    CHECK(rep.max_deviation <= 1e-12);
    CHECK(rep.offending_states.empty());
}

TEST_CASE("martingale validation flags a broken DAG") {
    ExplicitPrior p;
    p.states.resize(3);
    p.states[0].reward = 0.5;
    p.states[0].playable = true;
    p.states[0].edges = {{0.2, 0.5, 2}, {0.9, 0.5, 1}};
    p.states[1].reward = 0.9;
    p.states[2].reward = 0.2;
    ArmModel m = build_explicit(p, 1);
    ValidationReport rep = validate_martingale(m, 1e-9);
    CHECK_FALSE(rep.passed);
    CHECK(rep.max_deviation == doctest::Approx(0.05).epsilon(1e-12));
    REQUIRE(rep.offending_states.size() == 1);
    CHECK(rep.offending_states[0] == 0);
}

TEST_CASE("martingale validation passes vacuously with no playable states") {
    ExplicitPrior p;
    p.states.resize(1);
    p.states[0].reward = 0.7;
    p.states[0].playable = false;
    ValidationReport rep = validate_martingale(build_explicit(p, 1));
    CHECK(rep.passed);
    CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("beta state count is triangular and edges bounded") {
    for (int horizon = 1; horizon <= 8; ++horizon) {
        ArmModel m = build_beta_bernoulli(2, 3, horizon);
        CHECK(m.num_states() == (horizon + 1) * (horizon + 2) / 2);
        CHECK(m.edge_count <= 2 * static_cast<std::size_t>(m.num_states()));
    }
}

TEST_CASE("raising the budget never removes states or playability") {
    ArmModel tight = build_beta_bernoulli(1, 1, 4, 1.0);
    ArmModel loose = build_beta_bernoulli(1, 1, 4, 3.0);
    ArmModel free_arm = build_beta_bernoulli(1, 1, 4);
    REQUIRE(tight.num_states() == free_arm.num_states());
    REQUIRE(loose.num_states() == free_arm.num_states());
    for (StateId u = 0; u < free_arm.num_states(); ++u) {
        if (tight.state(u).playable) CHECK(loose.state(u).playable);
        if (loose.state(u).playable) CHECK(free_arm.state(u).playable);
    }
}

TEST_CASE("generated models satisfy the martingale at 1e-9" *
          doctest::description("100 random models")) {
    std::mt19937_64 g(20260823);
    for (int i = 0; i < 70; ++i) {
        ValidationReport rep = validate_martingale(fhtest::random_model(g), 1e-9);
        CAPTURE(i);
        CHECK(rep.passed);
    }
    for (int i = 0; i < 30; ++i) {
        ValidationReport rep = validate_martingale(fhtest::random_multivalue_model(g), 1e-9);
        CAPTURE(i);
        CHECK(rep.passed);
    }
}

TEST_CASE("value support is collected ascending") {
    ArmModel beta = build_beta_bernoulli(1, 2, 3);
    CHECK(beta.value_support() == std::vector<double>{0.0, 1.0});
    MixturePrior p;
    p.values = {0.25, 1.0, 2.0};
    p.components.push_back({1.0, {0.2, 0.3, 0.5}});
    CHECK(build_mixture(p, 2).value_support() == std::vector<double>{0.25, 1.0, 2.0});
}

TEST_CASE("child_on unknown value returns -1") {
    ArmModel m = build_beta_bernoulli(1, 1, 2);
    CHECK(m.child_on(m.root, 0.5) == -1);
}

TEST_CASE("round_down_pow2") {
    CHECK(round_down_pow2(3.0) == 2.0);
    CHECK(round_down_pow2(5.0) == 4.0);
    CHECK(round_down_pow2(1.0) == 1.0);
    CHECK(round_down_pow2(2.0) == 2.0);
    CHECK(round_down_pow2(0.75) == 0.5);
    CHECK(round_down_pow2(8.0) == 8.0);
}

} // TEST_SUITE
