// Shared basics: error taxonomy, hashing, deterministic RNG helpers.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace semvec {

// Exit-code mapping at the CLI: ConfigError -> 1, DataError -> 2, NumericalError -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Position-keyed uniform in [0,1). Decisions derived from it do not depend on
// traversal order, which keeps sharded corpus passes bit-identical to serial ones.
inline double hash_uniform(uint64_t seed, uint64_t position) {
    uint64_t h = splitmix64(seed ^ splitmix64(position + 0x51ed270b7a04b6d1ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

inline uint64_t pair_key(int i, int j) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(i)) << 32) | static_cast<uint32_t>(j);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

}  // namespace semvec
