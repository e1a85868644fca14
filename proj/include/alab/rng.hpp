#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace alab {

// Deterministic RNG streams. Every consumer derives its own stream from
// (seed, tag, indices), so results never depend on evaluation order or
// worker count.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_tag(std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0,1) with 53 bits, independent of the platform's
    // uniform_real_distribution.
    double uniform01() { return (eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 eng_;
};

inline Rng derive_rng(uint64_t seed, std::string_view tag, uint64_t a = 0, uint64_t b = 0) {
    uint64_t s = splitmix64(seed ^ hash_tag(tag));
    s = splitmix64(s ^ (0x9e3779b97f4a7c15ULL + a));
    s = splitmix64(s ^ (0xc2b2ae3d27d4eb4fULL + b));
    return Rng(s);
}

}  // namespace alab
