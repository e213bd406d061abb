#include "da/bigint.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace da {

BigUint::BigUint(uint64_t v) {
    if (v) limbs_.push_back(static_cast<uint32_t>(v));
    if (v >> 32) limbs_.push_back(static_cast<uint32_t>(v >> 32));
}

BigUint BigUint::from_string(const std::string& decimal) {
    BigUint r;
    for (char c : decimal) {
        if (c < '0' || c > '9') throw std::invalid_argument("BigUint: bad decimal digit");
        r.mul_small(10);
        r.add(BigUint(static_cast<uint64_t>(c - '0')));
    }
    return r;
}

uint64_t BigUint::as_u64() const {
    uint64_t v = 0;
    if (limbs_.size() > 1) v = static_cast<uint64_t>(limbs_[1]) << 32;
    if (!limbs_.empty()) v |= limbs_[0];
    return v;
}

int BigUint::cmp(const BigUint& o) const {
    if (limbs_.size() != o.limbs_.size()) return limbs_.size() < o.limbs_.size() ? -1 : 1;
    for (size_t i = limbs_.size(); i-- > 0;) {
        if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
    }
    return 0;
}

void BigUint::add(const BigUint& o) {
    limbs_.resize(std::max(limbs_.size(), o.limbs_.size()), 0);
    uint64_t carry = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
        uint64_t s = carry + limbs_[i] + (i < o.limbs_.size() ? o.limbs_[i] : 0);
        limbs_[i] = static_cast<uint32_t>(s);
        carry = s >> 32;
    }
    if (carry) limbs_.push_back(static_cast<uint32_t>(carry));
}

void BigUint::sub(const BigUint& o) {
    assert(cmp(o) >= 0);
    int64_t borrow = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
        int64_t d = static_cast<int64_t>(limbs_[i]) - borrow -
                    (i < o.limbs_.size() ? static_cast<int64_t>(o.limbs_[i]) : 0);
        borrow = d < 0;
        limbs_[i] = static_cast<uint32_t>(d + (borrow << 32));
    }
    trim();
}

void BigUint::mul_small(uint32_t m) {
    if (m == 0) {
        limbs_.clear();
        return;
    }
    uint64_t carry = 0;
    for (auto& limb : limbs_) {
        uint64_t p = static_cast<uint64_t>(limb) * m + carry;
        limb = static_cast<uint32_t>(p);
        carry = p >> 32;
    }
    if (carry) limbs_.push_back(static_cast<uint32_t>(carry));
}

void BigUint::div_small_exact(uint32_t d) {
    uint32_t rem = divmod_small(d);
    assert(rem == 0);
    (void)rem;
}

uint32_t BigUint::divmod_small(uint32_t d) {
    uint64_t rem = 0;
    for (size_t i = limbs_.size(); i-- > 0;) {
        uint64_t cur = (rem << 32) | limbs_[i];
        limbs_[i] = static_cast<uint32_t>(cur / d);
        rem = cur % d;
    }
    trim();
    return static_cast<uint32_t>(rem);
}

BigUint BigUint::mul(const BigUint& o) const {
    if (is_zero() || o.is_zero()) return BigUint();
    BigUint r;
    r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
    for (size_t i = 0; i < limbs_.size(); ++i) {
        uint64_t carry = 0;
        for (size_t j = 0; j < o.limbs_.size(); ++j) {
            uint64_t cur = static_cast<uint64_t>(limbs_[i]) * o.limbs_[j] + r.limbs_[i + j] + carry;
            r.limbs_[i + j] = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        r.limbs_[i + o.limbs_.size()] += static_cast<uint32_t>(carry);
    }
    r.trim();
    return r;
}

size_t BigUint::bit_length() const {
    if (limbs_.empty()) return 0;
    uint32_t top = limbs_.back();
    size_t bits = (limbs_.size() - 1) * 32;
    while (top) {
        ++bits;
        top >>= 1;
    }
    return bits;
}

std::string BigUint::to_string() const {
    if (is_zero()) return "0";
    BigUint tmp = *this;
    std::string out;
    while (!tmp.is_zero()) {
        uint32_t chunk = tmp.divmod_small(1000000000u);
        std::string part = std::to_string(chunk);
        if (!tmp.is_zero()) part.insert(0, 9 - part.size(), '0');
        out.insert(0, part);
    }
    return out;
}

std::string BigUint::to_scientific(int digits) const {
    std::string dec = to_string();
    if (dec == "0") return "0";
    int exp = static_cast<int>(dec.size()) - 1;
    std::string mant = dec.substr(0, std::min<size_t>(dec.size(), static_cast<size_t>(digits)));
    std::string out(1, mant[0]);
    if (mant.size() > 1) out += "." + mant.substr(1);
    return out + "e" + std::to_string(exp);
}

BigUint BigUint::random_below(const BigUint& bound, Pcg32& rng) {
    assert(!bound.is_zero());
    size_t bits = bound.bit_length();
    size_t nlimbs = (bits + 31) / 32;
    uint32_t top_mask = (bits % 32) ? ((1u << (bits % 32)) - 1) : 0xffffffffu;
    for (;;) {
        BigUint r;
        r.limbs_.resize(nlimbs);
        for (size_t i = 0; i < nlimbs; ++i) r.limbs_[i] = rng.next_u32();
        r.limbs_.back() &= top_mask;
        r.trim();
        if (r.cmp(bound) < 0) return r;
    }
}

void BigUint::trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

BigUint binomial(uint32_t n, uint32_t k) {
    if (k > n) return BigUint();
    if (k > n - k) k = n - k;
    BigUint r(1);
    // C(n,k) = prod_{i=1..k} (n-k+i)/i, each division exact on the running product.
    for (uint32_t i = 1; i <= k; ++i) {
        r.mul_small(n - k + i);
        r.div_small_exact(i);
    }
    return r;
}

}  // namespace da
