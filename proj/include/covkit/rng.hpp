#pragma once

#include <cmath>
#include <cstdint>

namespace covkit::rng {

/// SplitMix64; used to expand seeds into well-mixed generator state.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256++ bit generator. All draws in the library go through this so
/// results are bit-identical across platforms and standard libraries.
class Xoshiro256pp {
public:
    static Xoshiro256pp from_seed(std::uint64_t seed) {
        SplitMix64 mix(seed);
        Xoshiro256pp g;
        g.s_[0] = mix.next();
        g.s_[1] = mix.next();
        g.s_[2] = mix.next();
        g.s_[3] = mix.next();
        return g;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4] = {};
};

/// Counter-based stream derivation: trial index k under master seed `seed`
/// gets an independent generator, so serial and parallel execution draw the
/// same numbers.
inline Xoshiro256pp stream_for(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return Xoshiro256pp::from_seed(mix.next());
}

/// Uniform draw on (0, 1]; never returns 0 so log() is safe.
template <class Gen>
double uniform01(Gen& g) {
    return static_cast<double>((g.next() >> 11) + 1) * 0x1.0p-53;
}

template <class Gen>
double uniform(Gen& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

/// Standard normal sampler (Box-Muller, cached spare).
class Gaussian {
public:
    template <class Gen>
    double next(Gen& g) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01(g);
        const double u2 = uniform01(g);
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace covkit::rng
