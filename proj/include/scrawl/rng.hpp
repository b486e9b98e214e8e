#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace scrawl {

// One RNG type everywhere; every operation that draws randomness takes an
// explicit Rng& so runs are reproducible from a single seed.
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean, double stddev) {
    // fresh distribution per draw: no hidden Box-Muller carry between calls
    return std::normal_distribution<double>(mean, stddev)(rng);
}

inline std::uint64_t draw_seed(Rng& rng) {
    return rng();
}

// Fisher-Yates permutation of [0, n).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

} // namespace scrawl
