#pragma once
// Monte Carlo plumbing: true-parameter-first arm samplers, episode records,
// and a deterministic parallel estimator.
//
// An episode draws each arm's true parameter once (Beta prior -> one theta;
// mixture -> one component), then observations are i.i.d. given the
// parameter.  This is distributionally identical to walking the posterior
// DAG's transition probabilities, and it is what lets the delayed executors
// consume buffered outcomes out of decision order.  Explicit-DAG arms have no
// parameter; their sampler walks the DAG, generating outcomes in play order,
// which preserves the same joint law.

#include <cstdint>
#include <functional>
#include <vector>

#include "fhbandit/rng.hpp"
#include "fhbandit/statespace.hpp"

namespace fhbandit {

// Per-episode observation source for one arm.  draw(stream) returns the next
// observed value; the sequence is exchangeable and matches the model's
// predictive law.  Consumes exactly one or more values from the arm's
// dedicated stream per call, independent of any other arm.
class ArmSampler {
public:
    // Draws the arm's true parameter from `setup` (theta for Beta arms, the
    // component for mixtures; nothing for explicit DAGs).
    ArmSampler(const ArmModel& model, RngStream& setup);

    double draw(RngStream& outcome_stream);

    // True when a DAG-walking sampler has reached a terminal state and cannot
    // produce further outcomes (always false for parametric samplers).
    bool exhausted() const;

private:
    const ArmModel* model_;
    // Beta/Bernoulli-mixture arms: probability table over the value support.
    std::vector<double> values_;
    std::vector<double> probs_;
    bool walk_ = false;      // explicit DAG: walk the posterior transitions
    StateId cursor_ = 0;
};

struct PlayRecord {
    int slot = 0;
    int arm = 0;
    double value = 0.0;
    bool chosen = false;  // max-reward variants: this play's value was collected
};

struct EpisodeResult {
    double total_reward = 0.0;
    std::vector<long> plays_per_arm;
    std::vector<PlayRecord> trace;
    double distance_cost = 0.0;  // switching variant

    bool operator==(const EpisodeResult& o) const {
        if (total_reward != o.total_reward || plays_per_arm != o.plays_per_arm ||
            distance_cost != o.distance_cost || trace.size() != o.trace.size())
            return false;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const auto& a = trace[i];
            const auto& b = o.trace[i];
            if (a.slot != b.slot || a.arm != b.arm || a.value != b.value || a.chosen != b.chosen)
                return false;
        }
        return true;
    }
};

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample stddev / sqrt(episodes)
    std::uint64_t episodes = 0;
    std::uint64_t seed = 0;
};

// Runs `runner(episode_index)` for indices 0..episodes-1, partitioned over
// `threads` workers.  Every episode derives its own substreams from
// (seed, index), and the reduction is done in index order, so the Estimate is
// bit-identical for any thread count.  threads <= 0 picks a default.
Estimate estimate_reward(const std::function<double(std::uint64_t)>& runner,
                         std::uint64_t episodes, std::uint64_t seed, int threads = 0);

} // namespace fhbandit
