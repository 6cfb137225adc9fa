#pragma once
// Variant dispatch shared by the CLI and the acceptance harness: solve a
// parsed instance into a certified solution, round-trip solutions through
// JSON, and run the matching executor under the Monte Carlo estimator.
//
// Solution files embed the instance hash (simulating against the wrong
// instance is refused) and the solver trace.  Per-state policies are stored
// explicitly for every variant except delayed feedback, whose block tables
// are large but cheap to reconstruct: they are rebuilt deterministically from
// the stored multiplier endpoints and verified against the stored dual bound
// to 1e-9 on load.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fhbandit/budgeted.hpp"
#include "fhbandit/delayed.hpp"
#include "fhbandit/instance.hpp"
#include "fhbandit/lagrangian.hpp"
#include "fhbandit/maxmab.hpp"
#include "fhbandit/sim.hpp"
#include "fhbandit/switching.hpp"

namespace fhbandit {

struct SolveOptions {
    std::optional<double> epsilon;           // overrides the instance's epsilon
    DelayRegime regime = DelayRegime::Auto;  // delayed variant only
};

struct SolvedInstance {
    Variant variant = Variant::Base;
    std::uint64_t hash = 0;       // instance_hash of the spec this solves
    double epsilon = 0.05;        // accuracy actually used
    double dual_bound = 0.0;
    double alpha = 1.0;           // executor participation probability
    std::vector<int> order;       // priority order where the executor takes one
    std::vector<ArmModel> arms;   // rebuilt from the spec

    // solver trace (outer multipliers for the two-level max-reward solver)
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double a = 1.0;
    int iterations = 0;
    bool searched = false;

    // exactly one payload below is populated, per `variant`
    std::optional<LambdaSolution> base;               // base and adversarial
    std::optional<SwitchingSolution> switching;
    std::optional<DelayedSolution> delayed;
    std::optional<LambdaSolution> maxmab_sequential;  // one-at-a-time feedback
    std::optional<TruncatedMaxMabSolution> maxmab_throttled;  // simultaneous
    std::optional<BudgetedSolution> budgeted;
};

// Dispatches to the variant's solve pipeline.  Rejects maxmab instances with
// budget_mode "only_max": that reduction is a per-arm library operation
// (only_max_reduction) with no end-to-end scheduler.
SolvedInstance solve_instance(const InstanceSpec& spec, const SolveOptions& opts = {});

std::string solution_to_json(const SolvedInstance& sol);

// Parses a solution for `spec`; throws std::invalid_argument on schema
// violations, on an instance-hash mismatch, and when a rebuilt delayed dual
// disagrees with the stored bound by more than 1e-9.
SolvedInstance solution_from_json(const InstanceSpec& spec, const std::string& json_text);

// One episode of the solved instance's executor; returns the episode reward.
double run_episode(const InstanceSpec& spec, const SolvedInstance& sol,
                   std::uint64_t seed, std::uint64_t episode);

// Monte Carlo estimate over `episodes` substreams of `seed`; threads <= 0
// picks hardware concurrency.  Deterministic for fixed (seed, episodes).
Estimate simulate_instance(const InstanceSpec& spec, const SolvedInstance& sol,
                           std::uint64_t episodes, std::uint64_t seed, int threads = 0);

} // namespace fhbandit
