#pragma once

#include <cstdint>
#include <random>

namespace fasthgt {

// All randomness in the library flows through mt19937_64 engines whose seeds
// are derived with splitmix64. Substreams are addressed by (base seed, stream,
// block): one substream per edge per block of sites in the simulator, one per
// trial in Monte Carlo drivers. Identical seeds give identical output.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t block = 0) {
    return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ block);
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream = 0, std::uint64_t block = 0) {
    return std::mt19937_64(substream_seed(base, stream, block));
}

// Uniform draw on [0,1) with 53-bit resolution; implementation-independent.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, k); rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t k) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % k;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace fasthgt
