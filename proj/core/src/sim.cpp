#include "fhbandit/sim.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace fhbandit {

ArmSampler::ArmSampler(const ArmModel& model, RngStream& setup) : model_(&model) {
    if (const auto* beta = std::get_if<BetaPrior>(&model.prior)) {
        const double theta = setup.beta_int(beta->alpha1, beta->alpha0);
        values_ = {0.0, 1.0};
        probs_ = {1.0 - theta, theta};
    } else if (const auto* mix = std::get_if<MixturePrior>(&model.prior)) {
        std::vector<double> weights;
        weights.reserve(mix->components.size());
        for (const auto& c : mix->components) weights.push_back(c.weight);
        const std::size_t c = setup.categorical(weights);
        values_ = mix->values;
        probs_ = mix->components[c].value_probs;
    } else {
        // Explicit DAG: no latent parameter; outcomes follow the posterior
        // predictive along the walk, which yields the same joint law.
        walk_ = true;
        cursor_ = model.root;
    }
}

bool ArmSampler::exhausted() const {
    return walk_ && model_->state(cursor_).edges.empty();
}

double ArmSampler::draw(RngStream& outcome_stream) {
    if (!walk_) {
        return values_[outcome_stream.categorical(probs_)];
    }
    const ArmState& s = model_->state(cursor_);
    if (s.edges.empty())
        throw std::logic_error("ArmSampler: explicit DAG exhausted (drew past model depth)");
    std::vector<double> probs;
    probs.reserve(s.edges.size());
    for (const auto& e : s.edges) probs.push_back(e.prob);
    const std::size_t k = outcome_stream.categorical(probs);
    cursor_ = s.edges[k].child;
    return s.edges[k].value;
}

Estimate estimate_reward(const std::function<double(std::uint64_t)>& runner,
                         std::uint64_t episodes, std::uint64_t seed, int threads) {
    Estimate est;
    est.episodes = episodes;
    est.seed = seed;
    if (episodes == 0) return est;

    int nt = threads;
    if (nt <= 0) {
        const unsigned hc = std::thread::hardware_concurrency();
        nt = static_cast<int>(hc == 0 ? 1 : (hc > 32 ? 32 : hc));
    }
    if (static_cast<std::uint64_t>(nt) > episodes) nt = static_cast<int>(episodes);

    // Every episode's value is written to its own slot and the reduction runs
    // sequentially in index order, so results are identical for any `threads`.
    std::vector<double> values(episodes, 0.0);
    if (nt == 1) {
        for (std::uint64_t i = 0; i < episodes; ++i) values[i] = runner(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
        pool.reserve(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t) {
            const std::uint64_t lo = episodes * static_cast<std::uint64_t>(t) /
                                     static_cast<std::uint64_t>(nt);
            const std::uint64_t hi = episodes * static_cast<std::uint64_t>(t + 1) /
                                     static_cast<std::uint64_t>(nt);
            pool.emplace_back([&, t, lo, hi] {
                try {
                    for (std::uint64_t i = lo; i < hi; ++i) values[i] = runner(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    double sum = 0.0;
    for (std::uint64_t i = 0; i < episodes; ++i) sum += values[i];
    est.mean = sum / static_cast<double>(episodes);
    if (episodes >= 2) {
        double ss = 0.0;
        for (std::uint64_t i = 0; i < episodes; ++i) {
            const double d = values[i] - est.mean;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(episodes - 1);
        est.stderr_ = std::sqrt(var / static_cast<double>(episodes));
    }
    return est;
}

} // namespace fhbandit
