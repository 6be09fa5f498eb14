#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lpnet {

/// Deterministic PRNG (splitmix64 core). Distribution sampling is
/// implemented here rather than with <random> adaptors so that streams are
/// identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    /// Standard normal via Box-Muller (non-cached form keeps the stream
    /// position independent of call parity).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Poisson sample; Knuth multiplication below lambda=30, normal
    /// approximation above (adequate for shot-noise generation).
    std::uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda > 30.0) {
            double x = std::round(normal(lambda, std::sqrt(lambda)));
            return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
        }
        double l = std::exp(-lambda);
        double p = 1.0;
        std::uint64_t k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > l);
        return k - 1;
    }

    /// Derive an independent stream, e.g. per image or per worker.
    Rng fork(std::uint64_t salt) const {
        Rng r(state_ ^ (0x632be59bd9b4e019ull * (salt + 1)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
};

} // namespace lpnet
