#pragma once

#include <cstdint>
#include <random>

namespace sar {

/// Uniform double in [0,1) from the top 53 bits of the engine output.
/// std::uniform_real_distribution is implementation-defined; this keeps
/// seeded runs reproducible across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// SplitMix64 step; compact deterministic stream for fault injection and
/// seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace sar
