#ifndef QRWR_SAMPLING_HPP
#define QRWR_SAMPLING_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace qrwr {

/// SplitMix64 finaliser; used to derive independent seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Engine for substream `index` of `stream` under `seed`. Depends on nothing
/// else, so the schedule of shots across threads cannot change the draws.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return std::mt19937_64{splitmix64(seed ^ splitmix64(stream ^ splitmix64(index)))};
}

// The samplers below avoid std::*_distribution so that a seed reproduces the
// same draws under every standard library (the engine output is specified,
// the distributions are not).

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Bose-Einstein (geometric) count with the given mean, by inversion.
inline std::int64_t sample_thermal(std::mt19937_64& g, double mean) {
    if (mean <= 0.0) return 0;
    const double u = 1.0 - uniform01(g);  // (0, 1]
    return static_cast<std::int64_t>(std::floor(std::log(u) / -std::log1p(1.0 / mean)));
}

namespace detail {

// Sequential-search inversion; cost grows with the mean.
inline std::int64_t poisson_inversion(std::mt19937_64& g, double mean) {
    const double u = uniform01(g);
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u >= cdf && k < 1000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

// Transformed rejection with squeeze (Hoermann, PTRS), mean >= 10.
inline std::int64_t poisson_ptrs(std::mt19937_64& g, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform01(g) - 0.5;
        const double v = uniform01(g);
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(k);
    }
}

}  // namespace detail

/// Poisson count: inversion for small means, PTRS above 10.
inline std::int64_t sample_poisson(std::mt19937_64& g, double mean) {
    if (mean <= 0.0) return 0;
    return mean < 10.0 ? detail::poisson_inversion(g, mean) : detail::poisson_ptrs(g, mean);
}

/// Independent thinning: each of n photons survives with probability p.
inline std::int64_t sample_binomial(std::mt19937_64& g, std::int64_t n, double p) {
    if (p <= 0.0 || n <= 0) return 0;
    if (p >= 1.0) return n;
    std::int64_t kept = 0;
    for (std::int64_t i = 0; i < n; ++i) kept += uniform01(g) < p;
    return kept;
}

}  // namespace qrwr

#endif  // QRWR_SAMPLING_HPP
