#pragma once

#include <cmath>
#include <cstdint>

namespace despeck {

// xoshiro256** with splitmix64 seeding. Fixed algorithm so that identical
// seeds give bit-identical streams on every platform, independent of the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            std::uint64_t s = z;
            s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
            s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
            word = s ^ (s >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard exponential via inversion; argument of log stays in (0, 1].
    double next_exp() {
        return -std::log(1.0 - next_double());
    }

    // Gamma(shape = looks, scale = 1/looks): mean 1, variance 1/looks.
    // Exact sum-of-exponentials construction for integer shape.
    double next_gamma_looks(int looks) {
        double sum = 0.0;
        for (int i = 0; i < looks; ++i) sum += next_exp();
        return sum / static_cast<double>(looks);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace despeck
