#include "meritluck/random.hpp"

#include <cmath>

namespace meritluck {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
    // splitmix64 finaliser applied to seed advanced by key steps of the golden
    // gamma; distinct keys give well-separated child seeds.
    std::uint64_t z = seed + (key + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SeedStream::uniform01() {
    // Top 53 bits scaled into [0, 1); every value is exactly representable.
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double SeedStream::uniform_pos() { return 1.0 - uniform01(); }

double SeedStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t SeedStream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t range = hi - lo;  // inclusive span minus one
    if (range == UINT64_MAX) return rng_();
    ++range;
    // Reject draws at or above the largest multiple of `range`, so every
    // residue is equally likely.
    std::uint64_t bound = UINT64_MAX / range * range;
    for (;;) {
        std::uint64_t x = rng_();
        if (x < bound) return lo + x % range;
    }
}

double SeedStream::normal() {
    // Box-Muller, cosine branch only, so each call consumes two uniforms and
    // streams stay aligned regardless of caller history.
    double u1 = uniform_pos();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace meritluck
