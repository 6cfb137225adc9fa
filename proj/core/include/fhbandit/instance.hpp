#pragma once
// Problem-instance plumbing: the on-disk JSON schema for instances, a stable
// content hash embedded in solution files, the canonical tight-gap instance
// generator, and the result record emitted by simulations.
//
// Instance JSON layout (schema_version 1):
//   {
//     "schema_version": 1,
//     "variant": "base" | "adversarial" | "switching" | "delayed"
//              | "maxmab" | "budgeted",
//     "n": <arm count>, "T": <horizon>, "K": <plays per slot>,
//     "epsilon": <target accuracy>,
//     "arms": [ { "prior": <prior>, "budget": <number, optional>,
//                 "delay": <slots, optional> }, ... ],
//     "metric":  { "distances": [[...]], "start": i, "travel_budget": L },
//     "order":   [ arm indices ],                  (optional)
//     "feedback_mode": "sequential" | "simultaneous",   (maxmab)
//     "budget_mode":   "all_plays" | "only_max"         (maxmab)
//   }
// Priors: {"type":"beta","alpha1":a,"alpha0":b},
//         {"type":"mixture","values":[...],
//          "components":[{"weight":w,"value_probs":[...]}, ...]},
//         {"type":"explicit","states":[{"reward":r,"playable":p,
//          "edges":[{"value":q,"prob":pr,"child":id}, ...]}, ...]}.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fhbandit/statespace.hpp"
#include "fhbandit/switching.hpp"

namespace fhbandit {

inline constexpr int kSchemaVersion = 1;

enum class Variant { Base, Adversarial, Switching, Delayed, MaxMab, Budgeted };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ArmSpec {
    PriorSpec prior;
    std::optional<double> budget;  // all-plays-cost budget encoded in the state space
    int delay = 0;                 // feedback delay in slots (delayed variant)
};

struct InstanceSpec {
    int schema_version = kSchemaVersion;
    Variant variant = Variant::Base;
    int plays_per_slot = 1;  // K
    int horizon = 0;         // T
    double epsilon = 0.05;
    std::vector<ArmSpec> arms;
    std::optional<MetricSpec> metric;          // switching
    std::optional<std::vector<int>> order;     // adversarial / budgeted arm order
    std::optional<std::string> feedback_mode;  // maxmab: sequential | simultaneous
    std::optional<std::string> budget_mode;    // maxmab: all_plays | only_max

    int n() const { return static_cast<int>(arms.size()); }
};

// Parses and validates; throws std::invalid_argument whose message names the
// offending field.  load_instance reads the file first (missing/unreadable
// file also throws std::invalid_argument).
InstanceSpec parse_instance(const std::string& json_text);
InstanceSpec load_instance(const std::string& path);

// Canonical JSON (sorted keys, shortest round-trip numbers); parse of the
// output reproduces the spec exactly.
std::string instance_to_json(const InstanceSpec& spec);
void save_instance(const InstanceSpec& spec, const std::string& path);

// FNV-1a (64-bit) over the canonical JSON text.
std::uint64_t instance_hash(const InstanceSpec& spec);

// Arm models of the instance: depth = T, budgets applied, delays attached.
std::vector<ArmModel> build_arms(const InstanceSpec& spec);

// The hard family: n two-type mixture arms (with probability 1/n^2 the arm
// pays 1 with probability 1 - 1/n and 0 otherwise; with the remaining
// probability it always pays 0), T = n, K = 1.  The dual gap on this family
// grows toward 2 as n grows.
InstanceSpec gen_tight_instance(int n);

struct ResultRecord {
    std::string variant;
    double dual_bound = 0.0;
    double sim_mean = 0.0;
    double sim_stderr = 0.0;
    std::optional<double> ratio;  // dual_bound / sim_mean, only when sim_mean > 0
    std::uint64_t episodes = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    // solver trace
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double a = 1.0;
    int iterations = 0;

    std::string to_json() const;
};

} // namespace fhbandit
