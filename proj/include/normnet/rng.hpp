#pragma once

#include <cmath>
#include <cstdint>

namespace normnet {

// Counter-based stream RNG built on splitmix64. Streams are derived from a
// root seed and a stream id, so per-trial / per-grid-point randomness is
// reproducible independently of scheduling order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : state_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream_id + 0xbf58476d1ce4e5b9ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; second value cached
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    // sign in {-1, +1}
    int rademacher() { return (next_u64() >> 63) ? 1 : -1; }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo is fine here: n is tiny relative to 2^64
        return next_u64() % n;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace normnet
