#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "relkin/types.hpp"

namespace relkin {

// Counter-based SplitMix64: draw i of stream s under seed k is
// mix64(k ^ mix64(s) + (i+1) * 0x9E3779B97F4A7C15). Doubles use the top 53 bits.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : key_(seed ^ mix64(stream)) {}

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vec3 unit_vector() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 2.0 * std::numbers::pi);
        const double s = std::sqrt(1.0 - z * z);
        return {s * std::cos(phi), s * std::sin(phi), z};
    }

    // Uniform in the ball of radius r.
    Vec3 in_ball(double r) { return unit_vector() * (r * std::cbrt(uniform())); }

    // Direction uniform, magnitude uniform in [0, r]. Favors small vectors.
    Vec3 radial_uniform(double r) { return unit_vector() * (r * uniform()); }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace relkin
