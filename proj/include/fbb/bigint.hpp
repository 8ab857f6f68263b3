#pragma once

// Minimal unsigned big integer: just enough exact arithmetic for
// type-class counting (multinomials, binomials, powers, sums).

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbb {

class BigUint {
 public:
  BigUint() = default;

  BigUint(std::uint64_t v) {
    if (v != 0) limbs_.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    if ((v >> 32) != 0) limbs_.push_back(static_cast<std::uint32_t>(v >> 32));
  }

  bool is_zero() const { return limbs_.empty(); }

  BigUint& operator*=(std::uint32_t m) {
    if (m == 0 || is_zero()) {
      limbs_.clear();
      return *this;
    }
    std::uint64_t carry = 0;
    for (auto& l : limbs_) {
      std::uint64_t prod = static_cast<std::uint64_t>(l) * m + carry;
      l = static_cast<std::uint32_t>(prod);
      carry = prod >> 32;
    }
    if (carry != 0) limbs_.push_back(static_cast<std::uint32_t>(carry));
    return *this;
  }

  BigUint& operator+=(const BigUint& o) {
    if (o.limbs_.size() > limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      std::uint64_t sum = carry + limbs_[i];
      if (i < o.limbs_.size()) sum += o.limbs_[i];
      limbs_[i] = static_cast<std::uint32_t>(sum);
      carry = sum >> 32;
    }
    if (carry != 0) limbs_.push_back(static_cast<std::uint32_t>(carry));
    return *this;
  }

  BigUint operator*(const BigUint& o) const {
    if (is_zero() || o.is_zero()) return BigUint{};
    std::vector<std::uint64_t> acc(limbs_.size() + o.limbs_.size(), 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
        std::uint64_t cur = acc[i + j] +
                            static_cast<std::uint64_t>(limbs_[i]) * o.limbs_[j] + carry;
        acc[i + j] = cur & 0xffffffffu;
        carry = cur >> 32;
      }
      std::size_t k = i + o.limbs_.size();
      while (carry != 0) {
        std::uint64_t cur = acc[k] + carry;
        acc[k] = cur & 0xffffffffu;
        carry = cur >> 32;
        ++k;
      }
    }
    BigUint r;
    r.limbs_.assign(acc.begin(), acc.end());
    r.trim();
    return r;
  }

  // In-place divide by a small divisor, returns remainder.
  std::uint32_t div_mod(std::uint32_t d) {
    if (d == 0) throw std::invalid_argument("BigUint: division by zero");
    std::uint64_t rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      std::uint64_t cur = (rem << 32) | limbs_[i];
      limbs_[i] = static_cast<std::uint32_t>(cur / d);
      rem = cur % d;
    }
    trim();
    return static_cast<std::uint32_t>(rem);
  }

  friend bool operator==(const BigUint& a, const BigUint& b) { return a.limbs_ == b.limbs_; }

  std::size_t bit_length() const {
    if (limbs_.empty()) return 0;
    std::uint32_t top = limbs_.back();
    std::size_t bits = 0;
    while (top != 0) {
      ++bits;
      top >>= 1;
    }
    return 32 * (limbs_.size() - 1) + bits;
  }

  // log base 2; exact to double precision via the top 64 bits.
  double log2() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    std::size_t bl = bit_length();
    if (bl <= 64) return std::log2(static_cast<double>(to_u64()));
    std::size_t shift = bl - 64;
    std::uint64_t top = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      std::size_t lo_bit = 32 * i;
      if (lo_bit + 32 <= shift) break;
      std::uint64_t limb = limbs_[i];
      if (lo_bit >= shift) {
        std::size_t pos = lo_bit - shift;
        if (pos < 64) top |= limb << pos;
      } else {
        top |= limb >> (shift - lo_bit);
      }
    }
    return std::log2(static_cast<double>(top)) + static_cast<double>(shift);
  }

  bool fits_u64() const { return bit_length() <= 64; }

  std::uint64_t to_u64() const {
    if (!fits_u64()) throw std::overflow_error("BigUint: value exceeds 64 bits");
    std::uint64_t v = 0;
    if (!limbs_.empty()) v = limbs_[0];
    if (limbs_.size() > 1) v |= static_cast<std::uint64_t>(limbs_[1]) << 32;
    return v;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    BigUint tmp = *this;
    std::string out;
    while (!tmp.is_zero()) {
      std::uint32_t chunk = tmp.div_mod(1000000000u);
      std::string part = std::to_string(chunk);
      if (tmp.is_zero()) {
        out.insert(0, part);
      } else {
        out.insert(0, std::string(9 - part.size(), '0') + part);
      }
    }
    return out;
  }

  static BigUint pow(std::uint32_t base, unsigned exp) {
    BigUint r(1);
    for (unsigned i = 0; i < exp; ++i) r *= base;
    return r;
  }

  static BigUint binomial(std::uint32_t n, std::uint32_t k) {
    if (k > n) return BigUint{};
    if (k > n - k) k = n - k;
    BigUint r(1);
    for (std::uint32_t i = 1; i <= k; ++i) {
      r *= (n - k + i);
      std::uint32_t rem = r.div_mod(i);
      assert(rem == 0);
      (void)rem;
    }
    return r;
  }

  // (sum counts)! / prod counts(i)!  via a product of binomials
  static BigUint multinomial(std::span<const int> counts) {
    BigUint r(1);
    std::uint32_t prefix = 0;
    for (int c : counts) {
      assert(c >= 0);
      prefix += static_cast<std::uint32_t>(c);
      r = r * binomial(prefix, static_cast<std::uint32_t>(c));
    }
    return r;
  }

 private:
  void trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }

  std::vector<std::uint32_t> limbs_;  // little endian, no trailing zeros
};

}  // namespace fbb
