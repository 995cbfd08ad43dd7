#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "eigenfiber/space.hpp"

namespace eigenfiber {

/// Deterministic splitmix64 stream addressed by (seed, name). Every
/// randomized component draws from its own named substream, so adding a
/// consumer never perturbs another's draws. Output is identical across
/// platforms (no libm, no std distributions).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view name) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (char c : name) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 1099511628211ULL;
        }
        state_ = seed ^ h;
        // burn-in decorrelates nearby (seed, name) pairs
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    cplx complex_box(double half_width = 1.0) {
        const double re = uniform(-half_width, half_width);
        const double im = uniform(-half_width, half_width);
        return cplx(re, im);
    }

private:
    std::uint64_t state_ = 0;
};

}  // namespace eigenfiber
