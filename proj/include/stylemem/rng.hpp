#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace stylemem {

// splitmix64, used for seed mixing and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Collapse several words (seed, epoch, stream tag, ...) into one stream seed.
// Derivation is purely functional, so any point in training can be replayed
// from (base seed, epoch, tag) alone.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t state = 0x853c49e6748fea9bULL;
    for (std::uint64_t w : words) {
        state ^= w + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
        state = splitmix64(state);
    }
    return splitmix64(state);
}

// PCG32 (O'Neill, pcg-random.org), the project-wide deterministic generator.
// Fixed algorithm, fixed constants: identical streams on every platform.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL) {
        state_ = 0;
        inc_ = (stream << 1) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18) ^ old) >> 27);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59);
        return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31));
    }

    // Uniform in [0, 1), 32-bit resolution.
    double next_double() { return next_u32() * (1.0 / 4294967296.0); }

    // Uniform in (0, 1], safe as a log() argument.
    double next_double_pos() { return (static_cast<double>(next_u32()) + 1.0) * (1.0 / 4294967296.0); }

    // Uniform integer in [0, bound) via Lemire-style rejection (unbiased).
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint32_t threshold = (-bound) % bound;
        for (;;) {
            std::uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 0;
};

// Standard-normal stream on top of Pcg32 via Box-Muller. The spare value is
// cached, so draws come in deterministic pairs.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = rng_.next_double_pos();
        double u2 = rng_.next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    Pcg32& uniform() { return rng_; }

private:
    Pcg32 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stream tags so unrelated consumers of the same base seed never collide.
namespace rng_stream {
constexpr std::uint64_t weight_init = 0x57494E49ULL;  // "WINI"
constexpr std::uint64_t shuffle = 0x53485546ULL;      // "SHUF"
constexpr std::uint64_t noise = 0x4E4F4953ULL;        // "NOIS"
}  // namespace rng_stream

}  // namespace stylemem
