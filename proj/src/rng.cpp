#include "xrdn/rng.hpp"

#include <cmath>

namespace xrdn {

std::uint64_t Rng::uniform_below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
}

double Rng::normal() {
    // Box-Muller, cosine branch only. u1 is kept away from zero so the log
    // stays finite.
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return r * std::cos(two_pi * u2);
}

long long Rng::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < kSmallMeanLimit) {
        // Inversion by sequential search.
        const double u = uniform01();
        double p = std::exp(-mean);
        double cdf = p;
        long long k = 0;
        while (u > cdf && k < 1000000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Gaussian approximation with continuity correction.
    const double z = normal();
    const double v = std::floor(mean + std::sqrt(mean) * z + 0.5);
    return v < 0.0 ? 0 : static_cast<long long>(v);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

}  // namespace xrdn
