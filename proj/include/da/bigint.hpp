#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "da/rng.hpp"

namespace da {

// Unsigned arbitrary-precision integer, base 2^32 limbs, little-endian.
// Covers exactly what the codebook math needs: products of binomial
// coefficients overflow 128 bits already at the default layer spec.
class BigUint {
public:
    BigUint() = default;
    BigUint(uint64_t v);  // NOLINT: implicit by intent
    static BigUint from_string(const std::string& decimal);

    bool is_zero() const { return limbs_.empty(); }
    bool fits_u64() const { return limbs_.size() <= 2; }
    uint64_t as_u64() const;  // valid only when fits_u64()

    // -1, 0, 1
    int cmp(const BigUint& o) const;
    bool operator==(const BigUint& o) const { return cmp(o) == 0; }
    bool operator<(const BigUint& o) const { return cmp(o) < 0; }
    bool operator<=(const BigUint& o) const { return cmp(o) <= 0; }

    void add(const BigUint& o);
    void sub(const BigUint& o);  // requires *this >= o
    void mul_small(uint32_t m);
    void div_small_exact(uint32_t d);  // requires exact divisibility
    uint32_t divmod_small(uint32_t d);  // in-place quotient, returns remainder
    BigUint mul(const BigUint& o) const;

    size_t bit_length() const;
    std::string to_string() const;
    // "1.88e40"-style rendering with the given number of significant digits.
    std::string to_scientific(int digits = 3) const;

    // Uniform in [0, bound) by rejection on bit_length(bound) random bits.
    static BigUint random_below(const BigUint& bound, Pcg32& rng);

private:
    void trim();
    std::vector<uint32_t> limbs_;
};

// Exact binomial coefficient via the multiplicative formula.
BigUint binomial(uint32_t n, uint32_t k);

}  // namespace da
