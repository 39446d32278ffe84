#pragma once

#include <cmath>
#include <cstdint>

namespace rydblock {

// Counter-based per-shot generator. Each (seed, stream) pair starts an
// independent splitmix64 sequence, so shots can be scheduled in any order or
// split across threads without changing a single draw. Streams are decorrelated
// by running the seed through the finalizer before adding the stream index;
// consecutive stream states then differ by +1 going into the next finalizer,
// which is exactly the increment pattern splitmix64 is designed to whiten.
class ShotRng {
public:
    ShotRng(std::uint64_t seed, std::uint64_t stream)
        : state_(finalize(seed) + stream) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return finalize(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second deviate of each pair is
    // cached, so a shot consumes one uniform pair per two normals.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the argument of log strictly positive.
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rydblock
