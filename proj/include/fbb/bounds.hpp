#pragma once

// Finite-blocklength lower and upper bounds on the minimum error
// probability, assembled from conditional-type spectra.
//
//   converse_underline:  max_{g>0}   min_P  Pr{f_u <= R-g | P} - nu_n(|Y|) 2^{-ng}
//   converse_J:          same with f_J
//   achievability_J:     min_{g>1/n} min_P  Pr{f_J <= R+g | P} + 2 kappa_n(|X|) 2^{-ng}
//   achievability_I:     same with f_I and 2 eta_n(|X|,|Y|)
//
// Tails are piecewise constant in gamma and the penalties are monotone,
// so the optima live at (or a nudge inside) the tail breakpoints; the
// search enumerates exactly those plus a cap where the penalty falls
// below 2^-64.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbb/channel.hpp"
#include "fbb/parallel.hpp"
#include "fbb/spectrum.hpp"
#include "fbb/typeclass.hpp"

namespace fbb {

enum class BoundVariant { converse_underline, converse_J, achievability_J, achievability_I };

inline bool is_converse(BoundVariant v) {
  return v == BoundVariant::converse_underline || v == BoundVariant::converse_J;
}

inline Functional variant_functional(BoundVariant v) {
  switch (v) {
    case BoundVariant::converse_underline: return Functional::underline_I;
    case BoundVariant::converse_J:
    case BoundVariant::achievability_J: return Functional::J;
    default: return Functional::I;
  }
}

inline const char* variant_name(BoundVariant v) {
  switch (v) {
    case BoundVariant::converse_underline: return "converse_underline";
    case BoundVariant::converse_J: return "converse_J";
    case BoundVariant::achievability_J: return "achievability_J";
    default: return "achievability_I";
  }
}

inline BoundVariant parse_variant(const std::string& name) {
  if (name == "converse_underline") return BoundVariant::converse_underline;
  if (name == "converse_J") return BoundVariant::converse_J;
  if (name == "achievability_J") return BoundVariant::achievability_J;
  if (name == "achievability_I") return BoundVariant::achievability_I;
  throw std::invalid_argument("unknown variant: " + name);
}

inline const std::vector<BoundVariant>& all_variants() {
  static const std::vector<BoundVariant> v{
      BoundVariant::converse_underline, BoundVariant::converse_J, BoundVariant::achievability_J,
      BoundVariant::achievability_I};
  return v;
}

struct BoundQuery {
  int n = 0;
  double rate = 0.0;           // bits per symbol
  double cost_budget = kInf;   // Gamma; kInf = unconstrained
  BoundVariant variant = BoundVariant::converse_underline;
};

struct BoundResult {
  BoundVariant variant = BoundVariant::converse_underline;
  double value = 0.0;        // clamped to [0,1]
  double raw = 0.0;          // tail -/+ penalty, unclamped
  double gamma_star = 0.0;
  InputType type_star;
  double penalty_log2 = 0.0;  // log2 of the additive penalty at gamma_star
  double tail_value = 0.0;
};

// Nudge used to evaluate achievability candidates strictly inside the
// constant piece below each breakpoint.
inline constexpr double kGammaNudge = 0x1.0p-30;

// log2 of the penalty constant multiplying 2^{-n gamma}
inline double penalty_constant_log2(BoundVariant v, int n, const Channel& ch) {
  switch (v) {
    case BoundVariant::converse_underline:
    case BoundVariant::converse_J:
      return nu(n, static_cast<int>(ch.output_size)).log2_value;
    case BoundVariant::achievability_J:
      return 1.0 + kappa_log2(n, static_cast<int>(ch.input_size));
    default:
      return 1.0 + eta_log2(n, static_cast<int>(ch.input_size),
                            static_cast<int>(ch.output_size));
  }
}

// Candidate gamma values for a single spectrum: breakpoints of the tail
// (converse) or nudged breakpoints plus the 1/n boundary (achievability),
// plus the cap where the penalty drops below 2^-64.
inline std::vector<double> gamma_candidates(const Spectrum& s, double rate, BoundVariant variant) {
  int n = s.base.n;
  double cap = (64.0 + penalty_constant_log2(variant, n, s.channel)) / n;
  std::vector<double> out;
  if (is_converse(variant)) {
    for (const auto& a : s.atoms) {
      double g = rate - a.f(variant_functional(variant));
      if (g > 0.0) out.push_back(g);
    }
  } else {
    double floor = 1.0 / n;
    out.push_back(floor + kGammaNudge);
    for (const auto& a : s.atoms) {
      double g = a.f(variant_functional(variant)) - rate - kGammaNudge;
      if (g > floor) out.push_back(g);
    }
  }
  out.push_back(cap);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

// Sorted functional values with cumulative log2 mass; tail(t) is the
// probability of { f <= t }.
struct TailTable {
  std::vector<double> f;
  std::vector<double> cum_log2;

  double tail_log2(double t) const {
    auto it = std::upper_bound(f.begin(), f.end(), t);
    if (it == f.begin()) return -kInf;
    return cum_log2[static_cast<std::size_t>(it - f.begin()) - 1];
  }

  double tail(double t) const {
    double l = tail_log2(t);
    return l == -kInf ? 0.0 : std::min(1.0, std::exp2(l));
  }
};

inline TailTable build_tail_table(std::vector<std::pair<double, double>>&& f_mass) {
  std::sort(f_mass.begin(), f_mass.end());
  TailTable t;
  t.f.reserve(f_mass.size());
  t.cum_log2.reserve(f_mass.size());
  RunningLse acc;
  for (const auto& [f, m] : f_mass) {
    acc.add(m);
    t.f.push_back(f);
    t.cum_log2.push_back(acc.log2_total());
  }
  return t;
}

// Min-over-types tracker: point updates, O(1) root query, ties resolve
// to the lowest index.
class MinTree {
 public:
  explicit MinTree(std::size_t n) : n_(n), cap_(std::bit_ceil(std::max<std::size_t>(n, 1))) {
    val_.assign(2 * cap_, kInf);
    arg_.assign(2 * cap_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      val_[cap_ + i] = 0.0;
      arg_[cap_ + i] = static_cast<std::uint32_t>(i);
    }
    for (std::size_t i = cap_; i-- > 1;) pull(i);
  }

  void set(std::size_t i, double v) {
    std::size_t node = cap_ + i;
    val_[node] = v;
    for (node >>= 1; node >= 1; node >>= 1) pull(node);
  }

  double min_value() const { return val_[1]; }
  std::size_t argmin() const { return arg_[1]; }

 private:
  void pull(std::size_t i) {
    std::size_t l = 2 * i, r = 2 * i + 1;
    if (val_[l] <= val_[r]) {
      val_[i] = val_[l];
      arg_[i] = arg_[l];
    } else {
      val_[i] = val_[r];
      arg_[i] = arg_[r];
    }
  }

  std::size_t n_, cap_;
  std::vector<double> val_;
  std::vector<std::uint32_t> arg_;
};

struct ConverseCandidate {
  double gamma = 0.0;
  double raw = -kInf;
  double tail = 0.0;
  std::size_t type_index = 0;
  bool valid = false;
};

// max over gamma of [min_P tail_P(R - gamma)] - penalty(gamma), taking
// the union of breakpoints over all feasible types. Events are merged
// in ascending threshold order; each type's running tail only grows, so
// a single sweep evaluates every candidate exactly.
inline ConverseCandidate converse_search(std::span<const TailTable* const> tables, double rate,
                                         int n, double pen_const_log2) {
  std::size_t m = tables.size();
  double gamma_max = (64.0 + pen_const_log2) / n;
  auto penalty = [&](double g) { return std::exp2(pen_const_log2 - n * g); };

  ConverseCandidate best;
  {
    // the cap candidate always exists
    double t_q = rate - gamma_max;
    double mt = kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double v = tables[i]->tail(t_q);
      if (v < mt) {
        mt = v;
        arg = i;
      }
    }
    best = {gamma_max, mt - penalty(gamma_max), mt, arg, true};
  }

  using Event = std::pair<double, std::size_t>;  // (f value, type index)
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap;
  std::vector<std::size_t> cursor(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (!tables[i]->f.empty()) heap.emplace(tables[i]->f[0], i);

  MinTree tails(m);
  while (!heap.empty()) {
    double t = heap.top().first;
    if (t >= rate) break;  // gamma = rate - t would not be positive
    std::size_t batch_owner = heap.top().second;
    while (!heap.empty() && heap.top().first == t) {
      std::size_t i = heap.top().second;
      heap.pop();
      // absorb every atom of this type at threshold exactly t
      std::size_t c = cursor[i];
      while (c + 1 < tables[i]->f.size() && tables[i]->f[c + 1] == t) ++c;
      tails.set(i, std::exp2(tables[i]->cum_log2[c]));
      cursor[i] = c + 1;
      if (c + 1 < tables[i]->f.size()) heap.emplace(tables[i]->f[c + 1], i);
    }
    double mt = tails.min_value();
    std::size_t arg = tails.argmin();
    double gamma = rate - t;
    double raw = mt - penalty(gamma);
    if (raw > best.raw) {
      // prefer reporting the type whose atom pinned this breakpoint
      std::size_t pick = arg;
      if (std::exp2(tables[batch_owner]->cum_log2[cursor[batch_owner] - 1]) == mt)
        pick = batch_owner;
      best = {gamma, raw, mt, pick, true};
    }
  }
  return best;
}

struct AchievabilityCandidate {
  double gamma = 0.0;
  double raw = kInf;
  double tail = 0.0;
  bool valid = false;
};

inline AchievabilityCandidate achievability_search_one(const TailTable& table, double rate, int n,
                                                       double pen_const_log2) {
  double floor = 1.0 / n;
  double gamma_max = (64.0 + pen_const_log2) / n;
  auto consider = [&](double gamma, AchievabilityCandidate& best) {
    double tail = table.tail(rate + gamma);
    double raw = tail + std::exp2(pen_const_log2 - n * gamma);
    if (!best.valid || raw < best.raw) best = {gamma, raw, tail, true};
  };
  AchievabilityCandidate best;
  consider(floor + kGammaNudge, best);
  consider(gamma_max, best);
  double prev = -kInf;
  for (double f : table.f) {
    if (f == prev) continue;
    prev = f;
    double gamma = f - rate - kGammaNudge;
    if (gamma > floor) consider(gamma, best);
  }
  return best;
}

}  // namespace detail

// Feasible input types for the outer minimization; empty means the
// theorem's min ranges over an empty set, which is an error.
inline std::vector<InputType> feasible_types(int n, const Channel& ch, double cost_budget) {
  auto types = enumerate_input_types(n, ch.input_size, ch.cost, cost_budget);
  if (types.empty()) throw infeasible_cost_error{};
  return types;
}

// Evaluate several variants of the same query; spectra are built once
// per feasible type and shared across variants and gamma candidates.
// Converse variants need every type's tail table at once (the gamma
// sweep crosses types); achievability-only queries stream type by type
// and keep nothing.
inline std::vector<BoundResult> compute_bounds(int n, double rate, double cost_budget,
                                               std::span<const BoundVariant> variants,
                                               const Channel& ch, int threads = 1) {
  auto types = feasible_types(n, ch, cost_budget);

  bool need[3] = {false, false, false};
  bool any_converse = false;
  for (BoundVariant v : variants) {
    need[static_cast<int>(variant_functional(v))] = true;
    any_converse = any_converse || is_converse(v);
  }

  auto finish = [&](BoundVariant v, double gamma, double raw, double tail,
                    std::size_t type_index) {
    BoundResult r;
    r.variant = v;
    r.gamma_star = gamma;
    r.raw = raw;
    r.tail_value = tail;
    r.type_star = types[type_index];
    r.penalty_log2 =
        penalty_constant_log2(v, n, ch) - static_cast<double>(n) * gamma;
    r.value = std::min(1.0, std::max(0.0, raw));
    return r;
  };

  std::vector<BoundResult> out;
  out.reserve(variants.size());

  if (!any_converse) {
    std::vector<std::vector<detail::AchievabilityCandidate>> per_type(
        types.size(), std::vector<detail::AchievabilityCandidate>(variants.size()));
    parallel_for(types.size(), threads, [&](std::size_t i) {
      std::vector<std::pair<double, double>> fm[3];
      scan_spectrum(types[i], ch,
                    [&](const ConditionalType&, double lp, double fu, double fj, double fi) {
                      if (need[1]) fm[1].emplace_back(fj, lp);
                      if (need[2]) fm[2].emplace_back(fi, lp);
                      (void)fu;
                    });
      detail::TailTable table[3];
      for (int s = 1; s < 3; ++s)
        if (need[s]) table[s] = detail::build_tail_table(std::move(fm[s]));
      for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        int sel = static_cast<int>(variant_functional(variants[vi]));
        per_type[i][vi] = detail::achievability_search_one(
            table[sel], rate, n, penalty_constant_log2(variants[vi], n, ch));
      }
    });
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
      detail::AchievabilityCandidate best;
      std::size_t best_idx = 0;
      for (std::size_t i = 0; i < types.size(); ++i) {
        if (!best.valid || per_type[i][vi].raw < best.raw) {
          best = per_type[i][vi];
          best_idx = i;
        }
      }
      out.push_back(finish(variants[vi], best.gamma, best.raw, best.tail, best_idx));
    }
    return out;
  }

  std::vector<std::array<detail::TailTable, 3>> tables(types.size());
  parallel_for(types.size(), threads, [&](std::size_t i) {
    std::vector<std::pair<double, double>> fm[3];
    scan_spectrum(types[i], ch,
                  [&](const ConditionalType&, double lp, double fu, double fj, double fi) {
                    if (need[0]) fm[0].emplace_back(fu, lp);
                    if (need[1]) fm[1].emplace_back(fj, lp);
                    if (need[2]) fm[2].emplace_back(fi, lp);
                  });
    for (int s = 0; s < 3; ++s)
      if (need[s]) tables[i][s] = detail::build_tail_table(std::move(fm[s]));
  });

  for (BoundVariant v : variants) {
    int sel = static_cast<int>(variant_functional(v));
    double pen_const = penalty_constant_log2(v, n, ch);
    if (is_converse(v)) {
      std::vector<const detail::TailTable*> sub;
      sub.reserve(types.size());
      for (auto& t : tables) sub.push_back(&t[sel]);
      auto c = detail::converse_search(sub, rate, n, pen_const);
      out.push_back(finish(v, c.gamma, c.raw, c.tail, c.type_index));
    } else {
      detail::AchievabilityCandidate best;
      std::size_t best_idx = 0;
      std::vector<detail::AchievabilityCandidate> per_type(types.size());
      parallel_for(types.size(), threads, [&](std::size_t i) {
        per_type[i] = detail::achievability_search_one(tables[i][sel], rate, n, pen_const);
      });
      for (std::size_t i = 0; i < types.size(); ++i) {
        if (!best.valid || per_type[i].raw < best.raw) {
          best = per_type[i];
          best_idx = i;
        }
      }
      out.push_back(finish(v, best.gamma, best.raw, best.tail, best_idx));
    }
  }
  return out;
}

inline BoundResult compute_bound(const BoundQuery& q, const Channel& ch, int threads = 1) {
  BoundVariant v[1] = {q.variant};
  return compute_bounds(q.n, q.rate, q.cost_budget, v, ch, threads)[0];
}

inline BoundResult converse_lower_bound(const BoundQuery& q, const Channel& ch, int threads = 1) {
  if (!is_converse(q.variant)) throw std::invalid_argument("converse_lower_bound: wrong variant");
  return compute_bound(q, ch, threads);
}

inline BoundResult achievability_upper_bound(const BoundQuery& q, const Channel& ch,
                                             int threads = 1) {
  if (is_converse(q.variant))
    throw std::invalid_argument("achievability_upper_bound: wrong variant");
  return compute_bound(q, ch, threads);
}

// Lower bound on the error probability of an explicit code with the
// given codeword compositions: the per-composition tail average minus
// the nu penalty, at rate (1/n) log2 M.
inline double proposition1_lower_bound(std::span<const InputType> codeword_types, double rate,
                                       double gamma, const Channel& ch) {
  if (codeword_types.empty()) throw std::invalid_argument("no codewords");
  int n = codeword_types[0].n;
  double avg = 0.0;
  std::vector<std::pair<InputType, double>> cache;
  for (const auto& t : codeword_types) {
    double tail = -1.0;
    for (const auto& [ct, cv] : cache)
      if (ct == t) {
        tail = cv;
        break;
      }
    if (tail < 0.0) {
      Spectrum s = build_spectrum(t, ch);
      tail = tail_prob(s, Functional::underline_I, rate - gamma, TailCmp::le);
      cache.emplace_back(t, tail);
    }
    avg += tail;
  }
  avg /= static_cast<double>(codeword_types.size());
  double pen = std::exp2(nu(n, static_cast<int>(ch.output_size)).log2_value -
                         static_cast<double>(n) * gamma);
  return avg - pen;
}

struct SweepPoint {
  int n = 0;
  double rate = 0.0;
};

struct SweepRow {
  BoundQuery query;
  BoundResult result;
  double wall_time_ms = 0.0;
};

// One result per grid point per variant, ordered by grid then variant.
// Spectra are shared across the variants of each point.
inline std::vector<SweepRow> sweep(std::span<const SweepPoint> points, double cost_budget,
                                   std::span<const BoundVariant> variants, const Channel& ch,
                                   int threads = 1) {
  if (points.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow> rows;
  rows.reserve(points.size() * variants.size());
  for (const auto& pt : points) {
    auto t0 = std::chrono::steady_clock::now();
    auto results = compute_bounds(pt.n, pt.rate, cost_budget, variants, ch, threads);
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& r : results)
      rows.push_back({BoundQuery{pt.n, pt.rate, cost_budget, r.variant}, r, ms});
  }
  return rows;
}

}  // namespace fbb
