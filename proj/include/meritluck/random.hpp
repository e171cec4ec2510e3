#pragma once

#include <cstdint>
#include <random>

namespace meritluck {

// Mixes a seed and a key into an independent child seed (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);

// Deterministic random stream. All draws are implemented by hand on top of the
// raw mt19937_64 output so results are identical across platforms and standard
// library implementations.
class SeedStream {
   public:
    explicit SeedStream(std::uint64_t seed) : seed_(seed), rng_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01();

    // Uniform on (0, 1]; safe to pass to log().
    double uniform_pos();

    // Uniform on [lo, hi), lo < hi.
    double uniform(double lo, double hi);

    // Uniform integer on [lo, hi] inclusive, by rejection (no modulo bias).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Fair coin from one raw bit.
    bool coin() { return (rng_() & 1u) != 0; }

    // In-place Fisher-Yates shuffle of indices 0..n-1 stored in `idx`.
    template <typename Vec>
    void shuffle(Vec& idx) {
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(0, i - 1));
            std::swap(idx[i - 1], idx[j]);
        }
    }

    // Independent child stream; same (seed, key) always yields the same child.
    SeedStream substream(std::uint64_t key) const { return SeedStream(mix_seed(seed_, key)); }

   private:
    std::uint64_t seed_;
    std::mt19937_64 rng_;
};

}  // namespace meritluck
