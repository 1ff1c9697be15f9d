// Deterministic random streams for reproducible parallel simulation.
//
// SplitMix64 (Vigna, public domain recipe) is the only generator used.
// Every (event, optical module) pair owns a private stream derived by
// hashing the pair into a fresh state, so work units never share RNG
// state and results are independent of worker count and dispatch order.

#pragma once

#include <cstdint>

namespace telsim {

struct RngStream {
    std::uint64_t state = 0;
};

// One SplitMix64 output step with `x` as the state.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t next_u64(RngStream& s) {
    s.state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s.state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform in [0,1) with 53-bit resolution.
inline double next_uniform(RngStream& s) {
    return static_cast<double>(next_u64(s) >> 11) * 0x1.0p-53;
}

// om_id value reserved for the per-event muon propagation stream.
// Detector modules are numbered densely from 0 and may never use it.
inline constexpr std::uint64_t kPropagationStreamId = ~0ull;

// Counter-style stream derivation: distinct (event, om) pairs map to
// distinct states with overwhelming probability, and the mapping does
// not depend on how many streams were derived before this one.
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t event_id,
                               std::uint64_t om_id) {
    std::uint64_t h = splitmix64(seed) ^ splitmix64(event_id + 1) ^ splitmix64(om_id + 2);
    return RngStream{splitmix64(h)};
}

}  // namespace telsim
