#ifndef FEATLEARN_RNG_HPP
#define FEATLEARN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Seeded randomness helpers. std::uniform_*_distribution and std::shuffle
// are implementation-defined, so every draw here goes through explicit
// bit-level constructions to keep results identical across toolchains.

namespace featlearn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a child seed from a base seed and a stream index, so independent
// work items (reference samples, grid cells, CV folds) can be processed in
// any order without changing results.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [a, b) built from the top 53 bits of one draw.
inline double uniform_real(Rng& rng, double a, double b) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
}

// Standard normal via Box-Muller (one value per call, second discarded).
inline double normal(Rng& rng) {
    double u1 = uniform_real(rng, 0.0, 1.0);
    while (u1 <= 0.0) u1 = uniform_real(rng, 0.0, 1.0);
    const double u2 = uniform_real(rng, 0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// Fisher-Yates permutation of {0..n-1}.
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

} // namespace featlearn

#endif
