#pragma once

#include <cstdint>
#include <random>

namespace noisespec {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent generator for stream `index` of a run seeded with `seed`.
inline std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& g) noexcept
{
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) noexcept
{
    return lo + (hi - lo) * uniform01(g);
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) noexcept
{
    return static_cast<std::uint64_t>(uniform01(g) * static_cast<double>(n)) % n;
}

template <class It>
void shuffle(It first, It last, std::mt19937_64& g)
{
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_index(g, i);
        std::swap(first[i - 1], first[j]);
    }
}

} // namespace noisespec
