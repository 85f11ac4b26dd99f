#pragma once

#include "elmsync/common.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace elmsync {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/**
 * Counter-style seed derivation: the seed for a stream is a pure function
 * of the base seed and an index path (e.g. {tag, snr, trial}). Results
 * therefore never depend on scheduling or worker count.
 */
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(base);
    for (std::uint64_t p : path) {
        h = mix64(h ^ mix64(p + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline Complex complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi_inclusive) {
    return std::uniform_int_distribution<std::size_t>(lo, hi_inclusive)(rng);
}

}  // namespace elmsync
