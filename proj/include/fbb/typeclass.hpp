#pragma once

// Input types P_n(X), conditional types V_n(Y|P), exact type-class
// counting, and the combinatorial constants nu_n, kappa_n, eta_n.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbb/bigint.hpp"
#include "fbb/channel.hpp"

namespace fbb {

// Exact counts are kept up to this blocklength; beyond it only the
// log2 value (via log-gamma) is available.
inline constexpr int kExactCountMaxN = 64;

struct InputType {
  int n = 0;
  std::vector<int> counts;

  std::size_t input_size() const { return counts.size(); }

  Distribution distribution() const {
    Distribution p;
    p.probs.reserve(counts.size());
    for (int c : counts) p.probs.push_back(static_cast<double>(c) / n);
    return p;
  }

  double mean_cost(std::span<const double> cost) const {
    if (cost.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t x = 0; x < counts.size(); ++x) s += cost[x] * counts[x];
    return s / n;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t x = 0; x < counts.size(); ++x) {
      if (x) s += ':';
      s += std::to_string(counts[x]);
    }
    return s;
  }

  friend bool operator==(const InputType&, const InputType&) = default;
};

struct ConditionalType {
  InputType base;
  std::size_t output_size = 0;
  std::vector<int> table;  // |X| x |Y| row-major, row x sums to base.counts[x]

  int at(std::size_t x, std::size_t y) const { return table[x * output_size + y]; }
  int& at(std::size_t x, std::size_t y) { return table[x * output_size + y]; }

  ConditionalDistribution distribution() const {
    ConditionalDistribution v(base.counts.size(), output_size);
    for (std::size_t x = 0; x < base.counts.size(); ++x) {
      int cx = base.counts[x];
      if (cx == 0) {
        v.active[x] = 0;
        continue;
      }
      for (std::size_t y = 0; y < output_size; ++y)
        v.at(x, y) = static_cast<double>(at(x, y)) / cx;
    }
    return v;
  }

  friend bool operator==(const ConditionalType&, const ConditionalType&) = default;
};

struct LogCount {
  double log2_value = 0.0;
  std::optional<BigUint> exact_value;
};

namespace detail {

inline double log2_multinomial(int total, std::span<const int> counts) {
  double ln = std::lgamma(static_cast<double>(total) + 1.0);
  for (int c : counts) ln -= std::lgamma(static_cast<double>(c) + 1.0);
  return ln * kLog2E;
}

template <class Fn>
void enumerate_histograms_rec(int remaining, std::size_t pos, std::vector<int>& counts, Fn&& emit) {
  if (pos + 1 == counts.size()) {
    counts[pos] = remaining;
    emit();
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    counts[pos] = v;
    enumerate_histograms_rec(remaining - v, pos + 1, counts, emit);
  }
}

}  // namespace detail

// All histograms over `parts` bins summing to `total`, in descending
// lexicographic order (the enumeration order used everywhere).
inline std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> counts(parts, 0);
  detail::enumerate_histograms_rec(total, 0, counts, [&] { out.push_back(counts); });
  return out;
}

// Members of P_n(X) with mean cost at most `budget`, each exactly once.
inline std::vector<InputType> enumerate_input_types(int n, std::size_t input_size,
                                                    std::span<const double> cost = {},
                                                    double budget = kInf) {
  if (n < 1) throw std::invalid_argument("enumerate_input_types: n must be >= 1");
  std::vector<InputType> out;
  std::vector<int> counts(input_size, 0);
  double slack = budget < kInf ? 1e-12 * std::max(1.0, std::abs(budget)) : 0.0;
  detail::enumerate_histograms_rec(n, 0, counts, [&] {
    InputType t{n, counts};
    if (budget < kInf && t.mean_cost(cost) > budget + slack) return;
    out.push_back(std::move(t));
  });
  return out;
}

// Streaming enumeration of V_n(Y|P): the Cartesian product over active
// rows of all histograms summing to that row's count. Rows with zero
// count stay all-zero. Supports seeking so scans can be partitioned.
class ConditionalTypeEnumerator {
 public:
  ConditionalTypeEnumerator(const InputType& base, std::size_t output_size)
      : base_(base), output_size_(output_size) {
    rows_.reserve(base.counts.size());
    for (int c : base.counts) rows_.push_back(compositions(c, output_size));
    index_.assign(rows_.size(), 0);
  }

  std::uint64_t count() const {
    std::uint64_t total = 1;
    for (const auto& r : rows_) {
      std::uint64_t m = r.size();
      if (m != 0 && total > UINT64_MAX / m)
        throw std::overflow_error("conditional type count exceeds 2^64");
      total *= m;
    }
    return total;
  }

  void seek(std::uint64_t flat) {
    for (std::size_t x = rows_.size(); x-- > 0;) {
      std::uint64_t m = rows_[x].size();
      index_[x] = static_cast<std::size_t>(flat % m);
      flat /= m;
    }
    done_ = flat != 0;
  }

  bool done() const { return done_; }

  void fill(ConditionalType& out) const {
    out.base = base_;
    out.output_size = output_size_;
    out.table.assign(rows_.size() * output_size_, 0);
    for (std::size_t x = 0; x < rows_.size(); ++x) {
      const auto& row = rows_[x][index_[x]];
      for (std::size_t y = 0; y < output_size_; ++y) out.table[x * output_size_ + y] = row[y];
    }
  }

  std::span<const int> row(std::size_t x) const { return rows_[x][index_[x]]; }

  void advance() {
    for (std::size_t x = rows_.size(); x-- > 0;) {
      if (++index_[x] < rows_[x].size()) return;
      index_[x] = 0;
    }
    done_ = true;
  }

 private:
  InputType base_;
  std::size_t output_size_;
  std::vector<std::vector<std::vector<int>>> rows_;
  std::vector<std::size_t> index_;
  bool done_ = false;
};

template <class Fn>
void for_each_conditional_type(const InputType& base, std::size_t output_size, Fn&& fn) {
  ConditionalTypeEnumerator en(base, output_size);
  std::uint64_t total = en.count();
  ConditionalType v;
  for (std::uint64_t i = 0; i < total; ++i) {
    en.fill(v);
    fn(v);
    en.advance();
  }
}

inline std::vector<ConditionalType> enumerate_conditional_types(const InputType& base,
                                                                std::size_t output_size) {
  std::vector<ConditionalType> out;
  for_each_conditional_type(base, output_size, [&](const ConditionalType& v) { out.push_back(v); });
  return out;
}

// |T_P^n| = n! / prod_x counts(x)!
inline LogCount log_type_class_size(const InputType& p) {
  LogCount lc;
  lc.log2_value = detail::log2_multinomial(p.n, p.counts);
  if (p.n <= kExactCountMaxN) lc.exact_value = BigUint::multinomial(p.counts);
  return lc;
}

// |T_V^n(x)| = prod_x [counts(x)! / prod_y table(x,y)!]
inline LogCount log_cond_type_class_size(const ConditionalType& v) {
  LogCount lc;
  double log2 = 0.0;
  for (std::size_t x = 0; x < v.base.counts.size(); ++x) {
    std::span<const int> row(v.table.data() + x * v.output_size, v.output_size);
    log2 += detail::log2_multinomial(v.base.counts[x], row);
  }
  lc.log2_value = log2;
  if (v.base.n <= kExactCountMaxN) {
    BigUint exact(1);
    for (std::size_t x = 0; x < v.base.counts.size(); ++x) {
      std::span<const int> row(v.table.data() + x * v.output_size, v.output_size);
      exact = exact * BigUint::multinomial(row);
    }
    lc.exact_value = std::move(exact);
  }
  return lc;
}

// nu_n(a) = C(n+a-1, a-1), the number of types on an a-ary alphabet
inline LogCount nu(int n, int a) {
  LogCount lc;
  BigUint exact = BigUint::binomial(static_cast<std::uint32_t>(n + a - 1),
                                    static_cast<std::uint32_t>(a - 1));
  lc.log2_value = exact.log2();
  lc.exact_value = std::move(exact);
  return lc;
}

// log2 of kappa_n(a) = e^{a/12} (2 pi n)^{(a-1)/2}
inline double kappa_log2(int n, int a) {
  return kLog2E * (static_cast<double>(a) / 12.0) +
         (static_cast<double>(a - 1) / 2.0) * std::log2(2.0 * std::numbers::pi * n);
}

// log2 of eta_n(a,b) = kappa_n(a) nu_n(ab)
inline double eta_log2(int n, int a, int b) {
  return kappa_log2(n, a) + nu(n, a * b).log2_value;
}

}  // namespace fbb
