#pragma once

// Exact law of the conditional type of the channel output given an
// input of fixed composition, together with the three information
// functionals evaluated at every atom. Probabilities stay in the log2
// domain end to end; masses at large n underflow doubles otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fbb/channel.hpp"
#include "fbb/parallel.hpp"
#include "fbb/typeclass.hpp"

namespace fbb {

enum class Functional { underline_I, J, I };
enum class TailCmp { le, lt };

// Stable log2-sum-exp accumulator: tracks the running max M and
// S = sum 2^{v-M}, so the total is M + log2(S) with S >= 1.
class RunningLse {
 public:
  void add(double log2v) {
    if (log2v == -kInf) return;
    if (empty_) {
      max_ = log2v;
      sum_ = 1.0;
      empty_ = false;
      return;
    }
    if (log2v <= max_) {
      sum_ += std::exp2(log2v - max_);
    } else {
      sum_ = sum_ * std::exp2(max_ - log2v) + 1.0;
      max_ = log2v;
    }
  }

  double log2_total() const { return empty_ ? -kInf : max_ + std::log2(sum_); }

 private:
  double max_ = -kInf;
  double sum_ = 0.0;
  bool empty_ = true;
};

// log2 of a sum of 2^v terms; sorts descending first so the largest
// term anchors the accumulation.
inline double log2_sum_exp(std::vector<double> vals) {
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  RunningLse acc;
  for (double v : vals) acc.add(v);
  return acc.log2_total();
}

struct SpectrumAtom {
  ConditionalType cond_type;
  double log2_prob = 0.0;
  double f_underline = 0.0;
  double f_J = 0.0;
  double f_I = 0.0;

  double f(Functional sel) const {
    switch (sel) {
      case Functional::underline_I: return f_underline;
      case Functional::J: return f_J;
      default: return f_I;
    }
  }
};

struct Spectrum {
  InputType base;
  Channel channel;
  std::vector<SpectrumAtom> atoms;

  double total_mass_log2() const {
    std::vector<double> masses;
    masses.reserve(atoms.size());
    for (const auto& a : atoms) masses.push_back(a.log2_prob);
    return log2_sum_exp(std::move(masses));
  }
};

namespace detail {

// Per-(P,W) evaluator. Everything an atom needs reduces to table
// lookups: log2 of small integers and lgamma of factorials, both
// precomputed once, so the hot loop has no transcendental calls.
class AtomEvaluator {
 public:
  AtomEvaluator(const InputType& p, const Channel& ch)
      : n_(p.n), nx_(ch.input_size), ny_(ch.output_size), counts_(p.counts) {
    lgamma_.resize(n_ + 1);
    log2i_.resize(n_ + 1);
    for (int k = 0; k <= n_; ++k) {
      lgamma_[k] = std::lgamma(static_cast<double>(k) + 1.0);
      log2i_[k] = k > 0 ? std::log2(static_cast<double>(k)) : 0.0;
    }
    log2n_ = std::log2(static_cast<double>(n_));
    log2w_.resize(nx_ * ny_);
    for (std::size_t i = 0; i < log2w_.size(); ++i)
      log2w_[i] = ch.matrix[i] > 0.0 ? std::log2(ch.matrix[i]) : -kInf;
    pw_.assign(ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x) {
      double px = static_cast<double>(counts_[x]) / n_;
      for (std::size_t y = 0; y < ny_; ++y) pw_[y] += px * ch.w(x, y);
    }
    log2pw_.resize(ny_);
    for (std::size_t y = 0; y < ny_; ++y)
      log2pw_[y] = pw_[y] > 0.0 ? std::log2(pw_[y]) : -kInf;
    colsum_.resize(ny_);
  }

  // false when the table uses a zero channel entry (atom has zero mass)
  bool eval(std::span<const int> table, double& log2_prob, double& f_underline, double& f_J,
            double& f_I) {
    double lcount_ln = 0.0;  // ln |T_V^n(x)|
    double lw = 0.0;         // sum t * log2 W
    double cond_h = 0.0;     // n * H(V|P)
    double div_vw = 0.0;     // n * D(V||W|P)
    double j_sum = 0.0;      // n * J
    std::fill(colsum_.begin(), colsum_.end(), 0);
    for (std::size_t x = 0; x < nx_; ++x) {
      int cx = counts_[x];
      if (cx == 0) continue;
      lcount_ln += lgamma_[cx];
      double row_tlog = 0.0;
      for (std::size_t y = 0; y < ny_; ++y) {
        int t = table[x * ny_ + y];
        if (t == 0) continue;
        colsum_[y] += t;
        lcount_ln -= lgamma_[t];
        double l2w = log2w_[x * ny_ + y];
        if (l2w == -kInf) return false;
        lw += t * l2w;
        row_tlog += t * log2i_[t];
        div_vw += t * (log2i_[t] - log2i_[cx] - l2w);
        j_sum += t * (l2w - log2pw_[y]);
      }
      cond_h += cx * log2i_[cx] - row_tlog;
    }
    double col_tlog = 0.0;
    for (std::size_t y = 0; y < ny_; ++y)
      if (colsum_[y] > 0) col_tlog += colsum_[y] * log2i_[colsum_[y]];
    double hpv = log2n_ - col_tlog / n_;
    f_I = std::max(0.0, hpv - cond_h / n_);
    f_underline = f_I - div_vw / n_;
    f_J = j_sum / n_;
    log2_prob = lcount_ln * kLog2E + lw;
    return true;
  }

 private:
  int n_;
  std::size_t nx_, ny_;
  std::vector<int> counts_;
  std::vector<double> lgamma_, log2i_, log2w_, pw_, log2pw_;
  std::vector<int> colsum_;
  double log2n_ = 0.0;
};

// Visit positive-probability conditional types in [from, to) of the
// enumeration order; fn(V, log2_prob, f_underline, f_J, f_I).
template <class Fn>
void scan_spectrum_range(const InputType& p, const Channel& ch, std::uint64_t from,
                         std::uint64_t to, Fn&& fn) {
  ConditionalTypeEnumerator en(p, ch.output_size);
  en.seek(from);
  AtomEvaluator eval(p, ch);
  ConditionalType v;
  double lp, fu, fj, fi;
  for (std::uint64_t i = from; i < to; ++i, en.advance()) {
    en.fill(v);
    if (!eval.eval(v.table, lp, fu, fj, fi)) continue;
    fn(v, lp, fu, fj, fi);
  }
}

}  // namespace detail

template <class Fn>
void scan_spectrum(const InputType& p, const Channel& ch, Fn&& fn) {
  ConditionalTypeEnumerator en(p, ch.output_size);
  detail::scan_spectrum_range(p, ch, 0, en.count(), fn);
}

// log2 Pr{ Y^n in T_V^n(x) | X^n = x } for any representative x of V's
// base type: log2 |T_V^n(x)| + sum_{x,y} table(x,y) log2 W(y|x).
inline double cond_type_log_prob(const ConditionalType& v, const Channel& ch) {
  double lp = log_cond_type_class_size(v).log2_value;
  for (std::size_t x = 0; x < ch.input_size; ++x) {
    for (std::size_t y = 0; y < ch.output_size; ++y) {
      int t = v.at(x, y);
      if (t == 0) continue;
      double w = ch.w(x, y);
      if (w <= 0.0) return -kInf;
      lp += t * std::log2(w);
    }
  }
  return lp;
}

// One atom per positive-probability conditional type; zero-probability
// types (those touching a zero channel entry) are skipped outright.
inline Spectrum build_spectrum(const InputType& p, const Channel& ch, int threads = 1) {
  Spectrum s;
  s.base = p;
  s.channel = ch;
  ConditionalTypeEnumerator en(p, ch.output_size);
  std::uint64_t total = en.count();
  threads = resolve_threads(threads);
  if (threads <= 1 || total < 4096) {
    s.atoms.reserve(static_cast<std::size_t>(total));
    detail::scan_spectrum_range(p, ch, 0, total,
                                [&](const ConditionalType& v, double lp, double fu, double fj,
                                    double fi) { s.atoms.push_back({v, lp, fu, fj, fi}); });
    return s;
  }
  std::size_t blocks = static_cast<std::size_t>(threads);
  std::vector<std::vector<SpectrumAtom>> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    std::uint64_t lo = total * b / blocks;
    std::uint64_t hi = total * (b + 1) / blocks;
    detail::scan_spectrum_range(p, ch, lo, hi,
                                [&](const ConditionalType& v, double lp, double fu, double fj,
                                    double fi) { partial[b].push_back({v, lp, fu, fj, fi}); });
  });
  for (auto& block : partial)
    for (auto& atom : block) s.atoms.push_back(std::move(atom));
  return s;
}

// Exact probability that the selected functional compares to the
// threshold; atoms at -infinity always satisfy `le`.
inline double tail_prob(const Spectrum& s, Functional sel, double threshold,
                        TailCmp cmp = TailCmp::le) {
  std::vector<double> masses;
  for (const auto& a : s.atoms) {
    double f = a.f(sel);
    bool in = cmp == TailCmp::le ? f <= threshold : f < threshold;
    if (in) masses.push_back(a.log2_prob);
  }
  double total = log2_sum_exp(std::move(masses));
  return total == -kInf ? 0.0 : std::min(1.0, std::exp2(total));
}

}  // namespace fbb
