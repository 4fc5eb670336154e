#pragma once

#include <cstdint>
#include <random>

namespace cocyclelab {

using rng_engine = std::mt19937_64;

/// SplitMix64 finaliser; used to derive independent per-orbit and per-index
/// streams from one user seed.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_interval(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(rng_engine& rng) { return unit_interval(rng()); }

} // namespace cocyclelab
