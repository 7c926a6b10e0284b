// Seed handling shared by every stochastic component. All randomness in
// the toolkit flows through explicit 64-bit seeds; subsystems derive
// independent streams with seed_stream so that adding a consumer never
// shifts the draws of another.
#pragma once

#include <cstdint>
#include <random>

namespace aeromag {

namespace detail {
// splitmix64 finalizer; decorrelates nearby seed/stream pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Independent child seed for stream `id` of a run-level seed.
inline std::uint64_t seed_stream(std::uint64_t seed, std::uint64_t id) {
    return detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(id));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id = 0) {
    return std::mt19937_64(seed_stream(seed, stream_id));
}

}  // namespace aeromag
