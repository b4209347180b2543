#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lolguard {

// Deterministic helpers over std::mt19937_64. The standard distributions are
// implementation-defined, so anything that must reproduce bit-for-bit across
// toolchains goes through these.

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Stable per-purpose substream seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view purpose) {
    std::uint64_t h = fnv1a64(purpose) ^ (seed + 0x9e3779b97f4a7c15ull);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

inline std::size_t rand_below(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

// Uniform in [0, 1).
inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi).
inline double rand_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * rand_unit(rng);
}

// Fisher-Yates with rand_below, so the permutation only depends on the seed.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rand_below(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace lolguard
