#pragma once

#include <cstdint>
#include <random>
#include <string_view>

// Seeding and variate helpers. std::mt19937_64 is fully specified by the
// standard, but the distribution adaptors are not, so bounded integers and
// normals are generated here with fixed algorithms to keep outputs
// byte-identical across standard libraries.

namespace brlkit::rng {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Substream keyed by (seed, key): independent of iteration order elsewhere.
inline std::mt19937_64 make_stream(uint64_t seed, uint64_t key) {
    return std::mt19937_64(mix(seed, key));
}

inline std::mt19937_64 make_stream(uint64_t seed, std::string_view key) {
    return make_stream(seed, fnv1a64(key));
}

// Uniform in [0, n) by rejection; unbiased and portable.
inline uint64_t uniform_below(std::mt19937_64& g, uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = g();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Standard normal via Box-Muller (single value per call; the discarded
// second variate keeps the stream layout simple).
inline double normal(std::mt19937_64& g) {
    double u1;
    do {
        u1 = uniform01(g);
    } while (u1 <= 0.0);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace brlkit::rng
