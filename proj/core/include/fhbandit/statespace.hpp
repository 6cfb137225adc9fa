#pragma once
// Truncated posterior state spaces for individual arms.
//
// An arm is modeled by a DAG of belief states.  Playing the arm in state u
// yields an observation value q with probability Pr[X_u = q] and moves the
// belief to a unique successor child(u, q).  Each state carries the posterior
// mean reward r_u of a play made there.  Bayesian updating makes the reward
// process a martingale:
//
//     r_u = sum_q Pr[X_u = q] * q  =  sum_q Pr[X_u = q] * r_child(u,q).
//
// States deeper than the horizon T, or whose accumulated observed reward has
// already reached the arm's budget (all-plays-cost accounting), are kept but
// marked unplayable so forward passes can still track reach probabilities.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fhbandit {

using StateId = int;

// One observation branch out of a playable state.
struct ArmEdge {
    double value = 0.0;  // observed reward q
    double prob = 0.0;   // Pr[X_u = q]
    StateId child = -1;
};

struct ArmState {
    double reward = 0.0;        // posterior mean r_u
    int depth = 0;              // plays from the root
    bool playable = false;
    double observed_sum = 0.0;  // total observed reward accumulated on the way here
    std::vector<ArmEdge> edges; // sorted by value ascending; empty iff terminal
};

// Conjugate Beta prior over a Bernoulli arm.
struct BetaPrior {
    int alpha1 = 1; // successes + 1
    int alpha0 = 1; // failures + 1
};

// Finite mixture over known finite-support reward distributions.
// Component c has weight w_c and emits values[j] with probability probs[j].
struct MixtureComponent {
    double weight = 0.0;
    std::vector<double> value_probs;
};
struct MixturePrior {
    std::vector<double> values;             // strictly increasing, >= 0
    std::vector<MixtureComponent> components;
};

// Fully specified DAG (states as in ArmModel).  Used for hand instances and
// for arms whose posterior family is not Beta/mixture.
struct ExplicitPrior {
    struct State {
        double reward = 0.0;
        bool playable = false;
        std::vector<ArmEdge> edges;
    };
    std::vector<State> states; // index 0 is the root; edges point forward only
};

using PriorSpec = std::variant<BetaPrior, MixturePrior, ExplicitPrior>;

struct ArmModel {
    std::vector<ArmState> states;  // topologically ordered: child id > parent id
    StateId root = 0;
    int horizon = 0;               // max depth
    std::optional<double> budget;  // all-plays-cost budget B_i, if any
    int delay = 0;                 // feedback delay delta_i in slots
    std::size_t edge_count = 0;
    PriorSpec prior;               // retained for true-parameter-first sampling

    const ArmState& state(StateId u) const { return states[static_cast<std::size_t>(u)]; }
    int num_states() const { return static_cast<int>(states.size()); }

    // Distinct observation values appearing anywhere in the model, ascending.
    std::vector<double> value_support() const;

    // Successor of u on observing value q; -1 if no such edge.
    StateId child_on(StateId u, double q) const;
};

// Beta-Bernoulli arm truncated at horizon T.  States are indexed by
// (s successes, f failures) with s + f <= T; r_(s,f) = (a1+s)/(a1+a0+s+f).
// With a budget B, states whose accumulated observed reward (= s) has reached
// B are unplayable.
ArmModel build_beta_bernoulli(int alpha1, int alpha0, int horizon,
                              std::optional<double> budget = std::nullopt);

// Mixture-of-Bernoullis arm: components (weight, success probability),
// observations in {0,1}, posterior weights updated by Bayes' rule.
ArmModel build_mixture_bernoulli(const std::vector<std::pair<double, double>>& components,
                                 int horizon,
                                 std::optional<double> budget = std::nullopt);

// General finite-support mixture arm (values need not be {0,1}).
ArmModel build_mixture(const MixturePrior& prior, int horizon,
                       std::optional<double> budget = std::nullopt);

// Wrap an explicit DAG, validating structure (forward edges, depths,
// probability normalization) and computing depths/observed sums.
ArmModel build_explicit(const ExplicitPrior& prior, int horizon,
                        std::optional<double> budget = std::nullopt);

struct ValidationReport {
    double max_deviation = 0.0;          // worst martingale violation found
    std::vector<StateId> offending_states;
    bool passed = true;
};

// Checks, over playable states, both martingale identities:
//   |r_u - sum_q Pr[X_u=q] * r_child(u,q)| <= tol   and
//   |r_u - sum_q Pr[X_u=q] * q|            <= tol,
// plus probability normalization.  Report-only; never throws.
ValidationReport validate_martingale(const ArmModel& model, double tol = 1e-9);

// Round a value support down to powers of two ({3,5} -> {2,4}); used by the
// only-max-costs reduction, which assumes power-of-two reward values.
double round_down_pow2(double v);

} // namespace fhbandit
