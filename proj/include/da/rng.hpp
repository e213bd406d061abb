#pragma once

#include <cmath>
#include <cstdint>

namespace da {

inline uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives independent stream seeds from a master seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x632be59bd9b4e019ull * (stream + 1));
    return splitmix64(s);
}

// PCG32: tiny, fast, serializable (two u64 words). All toolkit randomness
// flows through this generator so runs are reproducible across platforms;
// std:: distributions are avoided because their output is
// implementation-defined.
class Pcg32 {
public:
    Pcg32() : Pcg32(0x853c49e6748fea9bull) {}
    explicit Pcg32(uint64_t seed, uint64_t stream = 0xda3e39cb94b95bdbull) {
        state_ = 0;
        inc_ = (stream << 1) | 1;
        next_u32();
        state_ += seed;
        next_u32();
    }

    uint32_t next_u32() {
        uint64_t old = state_;
        state_ = old * 6364136223846793005ull + inc_;
        uint32_t xorshifted = static_cast<uint32_t>(((old >> 18) ^ old) >> 27);
        uint32_t rot = static_cast<uint32_t>(old >> 59);
        return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31));
    }

    uint64_t next_u64() {
        uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Unbiased uniform in [0, bound) via Lemire-style rejection.
    uint32_t below(uint32_t bound) {
        uint32_t threshold = (-bound) % bound;
        for (;;) {
            uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }

    uint64_t below_u64(uint64_t bound) {
        uint64_t threshold = (-bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // [0,1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Box-Muller, no cached spare (keeps state exactly two words).
    double next_gauss() {
        double u1, u2;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(below(static_cast<uint32_t>(hi - lo + 1)));
    }

    uint64_t state() const { return state_; }
    uint64_t inc() const { return inc_; }
    void restore(uint64_t state, uint64_t inc) {
        state_ = state;
        inc_ = inc;
    }

private:
    uint64_t state_;
    uint64_t inc_;
};

}  // namespace da
