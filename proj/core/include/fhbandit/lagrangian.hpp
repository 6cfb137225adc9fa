#pragma once
// Per-arm Lagrangian dynamic programs and the coupled dual binary search.
//
// For a per-play price lambda, the gain DP computes, bottom-up over the DAG,
//
//     Gain(u) = max{ 0, r_u - lambda + sum_v p_uv Gain(v) },
//
// whose root value Q(lambda) is the best achievable R(P) - lambda * T(P) over
// single-arm policies; the maximizer plays exactly where Gain > 0 (ties stop).
// Q, R(L(lambda)) and T(L(lambda)) are all non-increasing in lambda, and the
// play sets are nested, so a binary search can bracket any target level of
// coupled consumption between lambda-minus and lambda-plus and mix the two
// endpoint policies to meet it exactly.  For every lambda >= 0,
//
//     lambda * RHS + sum_i Q_i(lambda)  >=  optimum of the coupled relaxation,
//
// (weak duality), so the mixed solution comes with a certified upper bound.

#include <functional>
#include <stdexcept>
#include <vector>

#include "fhbandit/policy.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

struct GainResult {
    std::vector<double> gain;  // per state
    SingleArmPolicy policy;    // Play iff gain > 0
    double q = 0.0;            // gain at the root = Q(lambda)
};

// O(edge_count) bottom-up gain DP.  Rejects lambda < 0 and models failing
// martingale validation.
GainResult gain_dp(const ArmModel& model, double lambda);

// Largest lambda at which the gain DP rooted at state u still plays:
//   index(u) = max{ lambda | Q(lambda, u) > 0 },
// computed by binary search to absolute tolerance tol.
double gittins_index(const ArmModel& model, StateId u, double tol = 1e-9);

// What a dual oracle reports for one multiplier value.  Generic over the
// deterministic per-arm policy type (single-play policies for the base
// variants, block policies for delayed feedback).
template <class P>
struct OracleEvalT {
    std::vector<P> policies;                // one per arm
    double value = 0.0;                     // sum of per-arm dual values at this lambda
    double consumption = 0.0;               // coupled-constraint left-hand side
    std::vector<int> aux_order;             // optional visit order (switching variant)
};

using OracleEval = OracleEvalT<SingleArmPolicy>;

template <class P>
using LambdaOracleT = std::function<OracleEvalT<P>(double lambda)>;

using LambdaOracle = LambdaOracleT<SingleArmPolicy>;

template <class P>
struct LambdaSolutionT {
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double a = 1.0;                        // probability of the lambda-minus branch
    std::vector<MixedPolicy<P>> policies;  // per-arm two-point mixes
    OracleEvalT<P> at_minus, at_plus;      // endpoint evaluations (for executors/serialization)
    double dual_bound = 0.0;
    double consumption = 0.0;              // mixed-consumption = a*C- + (1-a)*C+
    int iterations = 0;
    bool searched = false;                 // false when lambda = 0 already met the target
};

using LambdaSolution = LambdaSolutionT<SingleArmPolicy>;

// Generic coupled dual search.
//
// Maintains consumption(lambda-minus) > target_rhs >= consumption(lambda-plus),
// bisecting until lambda-plus - lambda-minus <= eps * M / (2 * n_arms *
// target_rhs) with M = value at lambda = 0.  The mixing fraction a solves
// a*C- + (1-a)*C+ = target_rhs and the dual bound is the a-weighted
// combination of the two endpoint bounds lambda*RHS + value(lambda).
//
// If consumption at lambda = 0 is already <= target_rhs the search returns
// immediately with lambda = 0 and a = 1.  lambda_hi <= 0 means "choose
// automatically" (2 * value(0), doubling further if consumption is still
// above target there).
template <class P>
LambdaSolutionT<P> coupled_lagrangian_search(const LambdaOracleT<P>& oracle, int n_arms,
                                             double target_rhs, double eps,
                                             double lambda_hi = 0.0) {
    if (eps <= 0.0 || eps > 1.0)
        throw std::invalid_argument("coupled_lagrangian_search: eps must be in (0,1]");
    if (target_rhs <= 0.0)
        throw std::invalid_argument("coupled_lagrangian_search: target_rhs must be > 0");

    LambdaSolutionT<P> sol;
    OracleEvalT<P> at_zero = oracle(0.0);
    const double m_proxy = at_zero.value; // M = total dual value at lambda = 0

    // Relative tolerance so that a mathematically-exact consumption == target
    // (e.g. play-everywhere policies filling the horizon) short-circuits even
    // when the forward-stats accumulation lands a few ulps above the target.
    if (at_zero.consumption <= target_rhs * (1.0 + 1e-12) || m_proxy <= 0.0) {
        // Constraint slack at lambda = 0: the unpriced policies are feasible.
        sol.lambda_minus = sol.lambda_plus = 0.0;
        sol.a = 1.0;
        sol.at_minus = at_zero;
        sol.at_plus = at_zero;
        sol.dual_bound = m_proxy;
        sol.consumption = at_zero.consumption;
        sol.searched = false;
        for (auto& p : at_zero.policies) sol.policies.push_back(MixedPolicy<P>::pure(p));
        return sol;
    }

    double hi = lambda_hi > 0.0 ? lambda_hi : 2.0 * m_proxy;
    OracleEvalT<P> at_hi = oracle(hi);
    int doublings = 0;
    while (at_hi.consumption > target_rhs) {
        // With hi = 2M every per-arm dual value is 0 and consumption should be
        // 0; keep doubling defensively, but a persistently non-shrinking
        // consumption means the oracle is not monotone.
        hi *= 2.0;
        at_hi = oracle(hi);
        if (++doublings > 64)
            throw std::runtime_error("coupled_lagrangian_search: consumption did not fall below target "
                                     "(non-monotone oracle?)");
    }

    double lo = 0.0;
    OracleEvalT<P> at_lo = at_zero;
    const double gap_tol = eps * m_proxy / (2.0 * static_cast<double>(n_arms) * target_rhs);

    int iters = 0;
    while (hi - lo > gap_tol) {
        double mid = 0.5 * (lo + hi);
        OracleEvalT<P> at_mid = oracle(mid);
        if (at_mid.consumption > target_rhs) {
            lo = mid;
            at_lo = std::move(at_mid);
        } else {
            hi = mid;
            at_hi = std::move(at_mid);
        }
        ++iters;
        if (iters > 400) throw std::runtime_error("coupled_lagrangian_search: bisection failed to converge");
    }

    const double c_minus = at_lo.consumption;
    const double c_plus = at_hi.consumption;
    // Invariant: c_minus > target_rhs >= c_plus, so the denominator is > 0.
    double a = (target_rhs - c_plus) / (c_minus - c_plus);
    if (a < 0.0) a = 0.0;
    if (a > 1.0) a = 1.0;

    sol.lambda_minus = lo;
    sol.lambda_plus = hi;
    sol.a = a;
    sol.iterations = iters;
    sol.searched = true;
    sol.dual_bound = a * (lo * target_rhs + at_lo.value) + (1.0 - a) * (hi * target_rhs + at_hi.value);
    sol.consumption = a * c_minus + (1.0 - a) * c_plus;
    sol.policies.reserve(at_lo.policies.size());
    for (std::size_t i = 0; i < at_lo.policies.size(); ++i)
        sol.policies.push_back(MixedPolicy<P>::two_point(at_lo.policies[i], at_hi.policies[i], a));
    sol.at_minus = std::move(at_lo);
    sol.at_plus = std::move(at_hi);
    return sol;
}

// Convenience oracle for the base (additive-reward) problem: per-arm gain DPs
// with consumption = total expected plays.
LambdaOracle make_base_oracle(const std::vector<ArmModel>& arms);

} // namespace fhbandit
