#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hornbill {

/// One SplitMix64 step; advances @p state.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of the independent stream (stream, substream) under a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
{
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ (stream * 0xD1B54A32D192ED03ULL);
    h = splitmix64(s);
    s = h ^ (substream * 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(s);
}

/**
 * @brief 64-bit Mersenne Twister with distribution code kept in-house so
 * that variates are identical across standard library implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
        : engine_(derive_seed(seed, stream, substream))
    {
    }

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open()
    {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    double exponential() { return -std::log(uniform_open()); }

    double normal()
    {
        const double u = uniform_open();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace hornbill
