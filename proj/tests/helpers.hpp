#pragma once
// Shared fixtures for the unit and acceptance suites: compact arm builders
// with known parameters, a seeded random-model generator for property tests,
// and small numeric helpers.

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "fhbandit/statespace.hpp"

namespace fhtest {

using namespace fhbandit;

// Arm that always emits `value` (a known, deterministic arm).
inline ArmModel known_arm(double value, int horizon,
                          std::optional<double> budget = std::nullopt) {
    MixturePrior p;
    p.values = {value};
    p.components.push_back({1.0, {1.0}});
    return build_mixture(p, horizon, budget);
}

// Known Bernoulli(p) arm over values {0, 1}.
inline ArmModel bernoulli_arm(double p, int horizon,
                              std::optional<double> budget = std::nullopt) {
    return build_mixture_bernoulli({{1.0, p}}, horizon, budget);
}

// Random arm drawn from the families every solver accepts: Beta priors or
// Bernoulli mixtures, with an occasional budget.  Deterministic given `g`.
inline ArmModel random_model(std::mt19937_64& g, int max_horizon = 6) {
    std::uniform_int_distribution<int> horizon_d(1, max_horizon);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int horizon = horizon_d(g);
    std::optional<double> budget;
    if (unit(g) < 0.25)
        budget = std::uniform_int_distribution<int>(1, max_horizon)(g);
    if (unit(g) < 0.5) {
        std::uniform_int_distribution<int> param(1, 4);
        return build_beta_bernoulli(param(g), param(g), horizon, budget);
    }
    std::uniform_int_distribution<int> count(1, 3);
    const int comps = count(g);
    std::vector<std::pair<double, double>> components;
    double total = 0.0;
    for (int c = 0; c < comps; ++c) {
        double w = 0.1 + unit(g);
        total += w;
        components.push_back({w, unit(g)});
    }
    for (auto& [w, p] : components) w /= total;
    return build_mixture_bernoulli(components, horizon, budget);
}

// Random multi-valued mixture arm (value support beyond {0,1}).
inline ArmModel random_multivalue_model(std::mt19937_64& g, int max_horizon = 4) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int horizon = std::uniform_int_distribution<int>(1, max_horizon)(g);
    const int nvals = std::uniform_int_distribution<int>(2, 3)(g);
    MixturePrior prior;
    double v = 0.0;
    for (int j = 0; j < nvals; ++j) {
        v += 0.25 + unit(g);
        prior.values.push_back(v);
    }
    const int comps = std::uniform_int_distribution<int>(1, 3)(g);
    double total = 0.0;
    for (int c = 0; c < comps; ++c) {
        MixtureComponent mc;
        mc.weight = 0.1 + unit(g);
        total += mc.weight;
        double psum = 0.0;
        for (int j = 0; j < nvals; ++j) {
            mc.value_probs.push_back(0.05 + unit(g));
            psum += mc.value_probs.back();
        }
        for (double& p : mc.value_probs) p /= psum;
        prior.components.push_back(std::move(mc));
    }
    for (auto& c : prior.components) c.weight /= total;
    return build_mixture(prior, horizon);
}

} // namespace fhtest
