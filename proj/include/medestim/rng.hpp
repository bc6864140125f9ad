#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

// Deterministic random number generation. The generator is std::mt19937_64
// (the 64-bit Mersenne Twister, identical across conforming implementations);
// all variate transforms are written out here instead of using
// <random> distributions, whose output is implementation-defined. Stream
// seeds are derived with SplitMix64 so that adding a stream never perturbs
// the draws of an existing one.

namespace medestim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hash-combines the words into one 64-bit seed.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t state = 0x8f1bbcdcbfa53e0bULL;
    for (std::uint64_t w : words) {
        state ^= splitmix64(state) ^ w;
        (void)splitmix64(state);
    }
    return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t a) { return derive_seed({a}); }
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) { return derive_seed({a, b}); }
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive_seed({a, b, c});
}
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return derive_seed({a, b, c, d});
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the sine twin is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, bound) by rejection, exact and portable.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace medestim
