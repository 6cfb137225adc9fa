#pragma once
// Counter-based deterministic random streams.
//
// Every simulation draw comes from a SplitMix64 stream whose initial state is
// a hash of (seed, episode, lane).  The generator state is an affine counter,
// so a stream is fully determined by its key: episodes can be executed in any
// order, on any number of threads, and replayed bit-for-bit.
//
// Lane convention used by the executors:
//   lane 0   — per-episode setup draws (true parameters, policy-branch coins,
//              subsampling coins), consumed in fixed arm order;
//   lane i+1 — arm i's observation stream, consumed one draw per play.
// Keeping each arm's observations on a private lane makes episode results
// independent of how the executor interleaves arms within a slot.

#include <cmath>
#include <cstdint>
#include <vector>

namespace fhbandit {

// SplitMix64 finalizer; a strong 64-bit mixing function.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t key) : state_(key) {}

    // Derive the stream for (seed, episode, lane).
    static RngStream substream(std::uint64_t seed, std::uint64_t episode, std::uint64_t lane) {
        std::uint64_t k = mix64(seed ^ 0x8f0c52f3b9e19b93ULL);
        k = mix64(k ^ mix64(episode ^ 0x1d8e4e27c47d124fULL));
        k = mix64(k ^ mix64(lane ^ 0xd6e8feb86659fd93ULL));
        return RngStream(k);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Gamma(k, 1) for integer shape k >= 1 as a sum of exponentials:
    // Gamma(k) = -log(u_1 ... u_k).  Exact and portable for the small
    // integer shapes used by conjugate priors.
    double gamma_int(int k) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            double u = next_double();
            // next_double() can return 0; nudge into (0,1) to keep log finite.
            if (u <= 0.0) u = 0x1.0p-53;
            acc -= std::log(u);
        }
        return acc;
    }

    // Beta(a, b) for integer a, b >= 1 via two Gamma draws.
    double beta_int(int a, int b) {
        double x = gamma_int(a);
        double y = gamma_int(b);
        return x / (x + y);
    }

    // Index drawn from a discrete distribution by CDF inversion.
    // Weights need not be perfectly normalized; the last index absorbs
    // any rounding slack.
    std::size_t categorical(const std::vector<double>& weights) {
        double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::uint64_t state_;
};

} // namespace fhbandit
