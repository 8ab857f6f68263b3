#pragma once

// Discrete memoryless channel, probability distributions, and the
// information measures everything else is built from. All entropies,
// divergences, rates and functionals are in bits (base-2 logs), with
// the convention 0*log 0 = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLog2E = std::numbers::log2e;
inline constexpr double kChannelTol = 1e-12;

inline double xlog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

struct Distribution {
  std::vector<double> probs;

  Distribution() = default;
  explicit Distribution(std::vector<double> p) : probs(std::move(p)) {}
  Distribution(std::initializer_list<double> p) : probs(p) {}

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

// Row x is a distribution over outputs whenever active[x] is set;
// inactive rows are ignored by every measure below.
struct ConditionalDistribution {
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  std::vector<double> rows;           // row-major
  std::vector<std::uint8_t> active;   // per-row support flag

  ConditionalDistribution() = default;
  ConditionalDistribution(std::size_t nx, std::size_t ny)
      : input_size(nx), output_size(ny), rows(nx * ny, 0.0), active(nx, 1) {}

  double at(std::size_t x, std::size_t y) const { return rows[x * output_size + y]; }
  double& at(std::size_t x, std::size_t y) { return rows[x * output_size + y]; }
};

struct Channel {
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  std::vector<double> matrix;  // row-major W(y|x)
  std::vector<double> cost;    // per input symbol, >= 0

  double w(std::size_t x, std::size_t y) const { return matrix[x * output_size + y]; }

  ConditionalDistribution rows() const {
    ConditionalDistribution v(input_size, output_size);
    v.rows = matrix;
    return v;
  }

  double min_cost() const {
    double m = kInf;
    for (double c : cost) m = std::min(m, c);
    return cost.empty() ? 0.0 : m;
  }

  static Channel bsc(double p) {
    Channel ch;
    ch.input_size = ch.output_size = 2;
    ch.matrix = {1.0 - p, p, p, 1.0 - p};
    ch.cost = {0.0, 0.0};
    return ch;
  }
};

class infeasible_cost_error : public std::runtime_error {
 public:
  infeasible_cost_error() : std::runtime_error("infeasible cost budget") {}
};

namespace detail {
inline std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}
}  // namespace detail

// nullopt on success, otherwise a message naming the first violation.
inline std::optional<std::string> validate_channel(const Channel& ch) {
  if (ch.input_size == 0 || ch.output_size == 0) return "empty alphabet";
  if (ch.matrix.size() != ch.input_size * ch.output_size)
    return "matrix size does not match alphabet sizes";
  if (ch.cost.size() != ch.input_size) return "cost vector size does not match input alphabet";
  for (std::size_t x = 0; x < ch.input_size; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < ch.output_size; ++y) {
      double v = ch.w(x, y);
      if (!(v >= 0.0) || v > 1.0)
        return "matrix entry (" + std::to_string(x) + "," + std::to_string(y) + ") = " +
               detail::trim_number(v) + " is outside [0,1]";
      sum += v;
    }
    if (std::abs(sum - 1.0) > kChannelTol)
      return "row " + std::to_string(x) + " sums to " + detail::trim_number(sum);
  }
  for (std::size_t x = 0; x < ch.input_size; ++x) {
    if (!(ch.cost[x] >= 0.0))
      return "cost[" + std::to_string(x) + "] = " + detail::trim_number(ch.cost[x]) +
             " is negative";
  }
  return std::nullopt;
}

inline std::optional<std::string> validate_distribution(const Distribution& p,
                                                        double tol = kChannelTol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0))
      return "entry " + std::to_string(i) + " = " + detail::trim_number(p[i]) + " is negative";
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > tol) return "probabilities sum to " + detail::trim_number(sum);
  return std::nullopt;
}

inline double mean_cost(const Distribution& p, std::span<const double> cost) {
  double s = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) s += cost[x] * p[x];
  return s;
}

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= xlog2(v);
  return h;
}

inline double entropy(const Distribution& p) { return entropy(std::span<const double>(p.probs)); }

inline double conditional_entropy(const ConditionalDistribution& v, const Distribution& p) {
  double h = 0.0;
  for (std::size_t x = 0; x < v.input_size; ++x) {
    if (!v.active[x] || p[x] <= 0.0) continue;
    double hx = 0.0;
    for (std::size_t y = 0; y < v.output_size; ++y) hx -= xlog2(v.at(x, y));
    h += p[x] * hx;
  }
  return h;
}

// D(V||W|P); +inf when V puts mass where W has none (for some x with P(x)>0)
inline double divergence_cond(const ConditionalDistribution& v, const ConditionalDistribution& w,
                              const Distribution& p) {
  double d = 0.0;
  for (std::size_t x = 0; x < v.input_size; ++x) {
    if (!v.active[x] || p[x] <= 0.0) continue;
    for (std::size_t y = 0; y < v.output_size; ++y) {
      double vy = v.at(x, y);
      if (vy <= 0.0) continue;
      double wy = w.at(x, y);
      if (wy <= 0.0) return kInf;
      d += p[x] * vy * std::log2(vy / wy);
    }
  }
  return d;
}

inline Distribution output_distribution(const Distribution& p, const ConditionalDistribution& v) {
  Distribution out;
  out.probs.assign(v.output_size, 0.0);
  for (std::size_t x = 0; x < v.input_size; ++x) {
    if (!v.active[x] || p[x] <= 0.0) continue;
    for (std::size_t y = 0; y < v.output_size; ++y) out.probs[y] += p[x] * v.at(x, y);
  }
  return out;
}

inline double mutual_info(const Distribution& p, const ConditionalDistribution& v) {
  double i = entropy(output_distribution(p, v)) - conditional_entropy(v, p);
  return std::max(0.0, i);
}

// J(P,V|W) = sum_x,y P(x) V(y|x) log2 W(y|x)/(PW)(y); -inf when the sum
// hits a zero channel entry with positive (P,V) mass.
inline double functional_J(const Distribution& p, const ConditionalDistribution& v,
                           const Channel& ch) {
  Distribution pw = output_distribution(p, ch.rows());
  double j = 0.0;
  for (std::size_t x = 0; x < ch.input_size; ++x) {
    if (!v.active[x] || p[x] <= 0.0) continue;
    for (std::size_t y = 0; y < ch.output_size; ++y) {
      double vy = v.at(x, y);
      if (vy <= 0.0) continue;
      double wy = ch.w(x, y);
      if (wy <= 0.0) return -kInf;
      j += p[x] * vy * std::log2(wy / pw.probs[y]);
    }
  }
  return j;
}

// underline-I(P,V|W) = I(P,V) - D(V||W|P)
inline double functional_underline_I(const Distribution& p, const ConditionalDistribution& v,
                                     const Channel& ch) {
  double d = divergence_cond(v, ch.rows(), p);
  if (d == kInf) return -kInf;
  return mutual_info(p, v) - d;
}

struct CapacityResult {
  double value_bits = 0.0;
  Distribution input;
};

namespace detail {

struct BaOutcome {
  std::vector<double> p;
  double info = 0.0;
  double cost = 0.0;
};

// Alternating maximization of I(p,W) - s * mean_cost(p); the update
// p'(x) ~ p(x) 2^{D(W_x||pW) - s c(x)} increases the objective each step.
inline BaOutcome blahut_arimoto(const Channel& ch, double s,
                                const std::vector<std::uint8_t>& allowed) {
  std::size_t nx = ch.input_size, ny = ch.output_size;
  std::size_t support = 0;
  for (std::size_t x = 0; x < nx; ++x) support += allowed[x] ? 1 : 0;
  std::vector<double> p(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    if (allowed[x]) p[x] = 1.0 / static_cast<double>(support);

  std::vector<double> q(ny), r(nx), t(nx);
  double prev_obj = -kInf;
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      if (p[x] <= 0.0) continue;
      for (std::size_t y = 0; y < ny; ++y) q[y] += p[x] * ch.w(x, y);
    }
    for (std::size_t x = 0; x < nx; ++x) {
      double d = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        double wy = ch.w(x, y);
        if (wy > 0.0) d += wy * std::log2(wy / q[y]);
      }
      r[x] = d;
      t[x] = d - s * ch.cost[x];
    }
    double obj = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      if (p[x] > 0.0) obj += p[x] * t[x];
    if (iter > 0 && std::abs(obj - prev_obj) < 1e-9) break;
    prev_obj = obj;

    double tmax = -kInf;
    for (std::size_t x = 0; x < nx; ++x)
      if (allowed[x]) tmax = std::max(tmax, t[x]);
    double z = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      if (!allowed[x] || p[x] <= 0.0) {
        p[x] = 0.0;
        continue;
      }
      p[x] *= std::exp2(t[x] - tmax);
      z += p[x];
    }
    for (auto& v : p) v /= z;
  }

  BaOutcome out;
  out.p = p;
  Distribution pd(p);
  out.info = mutual_info(pd, ch.rows());
  out.cost = mean_cost(pd, ch.cost);
  return out;
}

}  // namespace detail

// C(Gamma|W): constrained capacity via Blahut-Arimoto, with the cost
// constraint handled by bisection on the Lagrange multiplier.
inline CapacityResult capacity(const Channel& ch, double cost_budget = kInf) {
  std::vector<std::uint8_t> all(ch.input_size, 1);
  double cmin = ch.min_cost();
  if (cost_budget < cmin - kChannelTol) throw infeasible_cost_error{};

  auto finish = [](const detail::BaOutcome& o) {
    CapacityResult r;
    r.value_bits = o.info;
    r.input = Distribution(o.p);
    return r;
  };

  detail::BaOutcome free_opt = detail::blahut_arimoto(ch, 0.0, all);
  if (!(cost_budget < kInf) || free_opt.cost <= cost_budget + kChannelTol) return finish(free_opt);

  // Budget pinned at the cheapest symbols: optimize over those only.
  if (cost_budget <= cmin + kChannelTol) {
    std::vector<std::uint8_t> allowed(ch.input_size, 0);
    for (std::size_t x = 0; x < ch.input_size; ++x)
      allowed[x] = std::abs(ch.cost[x] - cmin) <= kChannelTol ? 1 : 0;
    return finish(detail::blahut_arimoto(ch, 0.0, allowed));
  }

  double lo = 0.0, hi = 1.0;
  detail::BaOutcome hi_out = detail::blahut_arimoto(ch, hi, all);
  while (hi_out.cost > cost_budget && hi < 0x1p50) {
    lo = hi;
    hi *= 2.0;
    hi_out = detail::blahut_arimoto(ch, hi, all);
  }
  for (int step = 0; step < 60; ++step) {
    double mid = 0.5 * (lo + hi);
    detail::BaOutcome mid_out = detail::blahut_arimoto(ch, mid, all);
    if (mid_out.cost > cost_budget) {
      lo = mid;
    } else {
      hi = mid;
      hi_out = mid_out;
    }
  }
  return finish(hi_out);
}

}  // namespace fbb
