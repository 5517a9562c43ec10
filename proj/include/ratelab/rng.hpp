#ifndef RATELAB_RNG_HPP
#define RATELAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace ratelab {

// SplitMix64 (Steele, Lea, Flood 2014). Counter-based, trivially splittable,
// fully specified: identical seeds give identical streams on every platform.
// This is the single RNG of the project; its name goes into output metadata.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1), a multiple of 2^-53.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (pair cached). Deterministic sequence.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        // avoid log(0)
        while (u1 <= 0.0) u1 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    static const char* algorithm_name() { return "splitmix64"; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Deterministic seed derivation for independent work items: feeds the pieces
// through one SplitMix64 mixing round each so that streams do not overlap for
// distinct (seed, a, b, c).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    SplitMix64 g(seed);
    std::uint64_t s = g.next_u64();
    s ^= SplitMix64(a + 0x1bd11bdaa9fc1a22ULL).next_u64();
    s = SplitMix64(s).next_u64();
    s ^= SplitMix64(b + 0x2545f4914f6cdd1dULL).next_u64();
    s = SplitMix64(s).next_u64();
    s ^= SplitMix64(c + 0x9e3779b97f4a7c15ULL).next_u64();
    return SplitMix64(s).next_u64();
}

}  // namespace ratelab

#endif
