#ifndef RATELAB_DYNSYS_HPP
#define RATELAB_DYNSYS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratelab/rng.hpp"

namespace ratelab {

enum class MapKind { Doubling, Lsv };

// Interval map on [0,1]: the doubling map, or the intermittent LSV map
//   T x = x (1 + 2^g x^g)  on [0,1/2),   T x = 2x - 1  on [1/2,1],
// with neutral fixed point at 0 for g > 0.
class MapSystem {
public:
    static MapSystem doubling() { return MapSystem(MapKind::Doubling, 0.0); }
    static MapSystem lsv(double gamma);  // gamma in (0,1)

    MapKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    std::string name() const;

    // One step of the map. Throws std::invalid_argument for x outside [0,1].
    double step(double x) const;

private:
    MapSystem(MapKind kind, double gamma) : kind_(kind), gamma_(gamma) {}
    MapKind kind_;
    double gamma_;  // only meaningful for Lsv
};

// Draws orbits distributed (after burn-in) according to the invariant
// measure. Same seed, same orbit, bit for bit.
//
// The doubling map cannot be iterated literally in binary floating point:
// 2x mod 1 drops one significand bit per step, so every double collapses
// onto the fixed point 0 within ~53 iterates. Doubling orbits are instead
// generated from the map's symbolic (Bernoulli) coding: a seeded i.i.d. bit
// stream slides through a 53-bit window, which reproduces the invariant law
// exactly and satisfies x_{j+1} = T x_j up to one ulp.
class OrbitSampler {
public:
    OrbitSampler(MapSystem system, std::uint64_t seed, long burn_in = 10000)
        : system_(system), seed_(seed), burn_in_(burn_in) {}

    const MapSystem& system() const { return system_; }
    std::uint64_t seed() const { return seed_; }
    long burn_in() const { return burn_in_; }

    std::vector<double> sample(std::size_t length) const;

    // Streaming variant for long orbits; f(x_j) is called for j = 0..length-1.
    template <class F>
    void visit(std::size_t length, F&& f) const {
        if (length < 1) throw std::invalid_argument("orbit length must be >= 1");
        if (system_.kind() == MapKind::Doubling) {
            visit_doubling(length, f);
        } else {
            SplitMix64 rng(seed_);
            double x = rng.next_uniform();
            for (long i = 0; i < burn_in_; ++i) x = system_.step(x);
            for (std::size_t j = 0; j < length; ++j) {
                f(x);
                x = system_.step(x);
            }
        }
    }

private:
    template <class F>
    void visit_doubling(std::size_t length, F&& f) const {
        SplitMix64 rng(seed_);
        std::uint64_t window = rng.next_u64();
        std::uint64_t incoming = rng.next_u64();
        int bits_left = 64;
        auto advance = [&]() {
            window = (window << 1) | (incoming >> 63);
            incoming <<= 1;
            if (--bits_left == 0) {
                incoming = rng.next_u64();
                bits_left = 64;
            }
        };
        for (long i = 0; i < burn_in_; ++i) advance();
        for (std::size_t j = 0; j < length; ++j) {
            f(static_cast<double>(window >> 11) * 0x1.0p-53);
            advance();
        }
    }

    MapSystem system_;
    std::uint64_t seed_;
    long burn_in_;
};

// First-return map of LSV to the section Y = (1/2, 1]: F y = T^{tau(y)} y,
// with tau the first-return time.
class InducedMap {
public:
    explicit InducedMap(MapSystem base, long max_return = 1000000);

    const MapSystem& base() const { return base_; }
    long max_return() const { return max_return_; }

    // Smallest n >= 1 with T^n y in (1/2, 1]. Throws ReturnOverflow if not
    // found within max_return iterates; std::invalid_argument if y is
    // outside (1/2, 1].
    long return_time(double y) const;

    struct Step {
        double image;  // F y
        long tau;
    };
    Step apply(double y) const;

private:
    MapSystem base_;
    long max_return_;
};

}  // namespace ratelab

#endif
