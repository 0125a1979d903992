#pragma once

#include <cstdint>
#include <random>

namespace xrdn {

// Deterministic random source. Raw 64-bit output comes from std::mt19937_64
// (bit-exact across platforms); all distribution mappings are implemented
// here explicitly so sequences do not depend on the standard library's
// unspecified distribution algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n);

    // Standard normal via Box-Muller (cosine branch; two uniforms per draw).
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Poisson sample: inversion by sequential search below kSmallMeanLimit,
    // normal approximation with continuity correction above.
    long long poisson(double mean);

    static constexpr double kSmallMeanLimit = 30.0;

private:
    std::mt19937_64 engine_;
};

// Seed mixing for per-item derived streams: splitmix64 applied to
// base ^ (golden-ratio constant * (index + 1)). Documented so parallel
// per-frame generation is reproducible by construction.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace xrdn
