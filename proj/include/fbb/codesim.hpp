#pragma once

// Constructive side: constant-composition random codebooks, the
// threshold and maximum-mutual-information decoders, exact brute-force
// error evaluation at tiny blocklengths, seeded Monte Carlo estimation,
// and an exact check of the meta-converse inequality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fbb/channel.hpp"
#include "fbb/parallel.hpp"
#include "fbb/rng.hpp"
#include "fbb/spectrum.hpp"
#include "fbb/typeclass.hpp"

namespace fbb {

struct Codebook {
  int n = 0;
  std::size_t message_count = 0;
  std::vector<std::vector<int>> words;  // each of the given composition
  InputType composition;
  std::uint64_t seed = 0;
};

enum class DecoderKind { threshold_J, mmi };

struct DecoderSpec {
  DecoderKind kind = DecoderKind::threshold_J;
  double gamma = 0.0;  // threshold decoder only
};

inline const char* decoder_name(DecoderKind k) {
  return k == DecoderKind::threshold_J ? "threshold_J" : "mmi";
}

struct SimResult {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double estimate = 0.0;
  double wilson_upper_95 = 0.0;
  DecoderKind decoder = DecoderKind::threshold_J;
  double gamma = 0.0;
};

// Words drawn i.i.d. uniformly from the type class by shuffling the
// composition multiset (duplicates across messages are allowed).
inline Codebook generate_codebook(const InputType& p, std::size_t message_count,
                                  std::uint64_t seed) {
  if (message_count < 1) throw std::invalid_argument("generate_codebook: need at least 1 message");
  Codebook cb;
  cb.n = p.n;
  cb.message_count = message_count;
  cb.composition = p;
  cb.seed = seed;
  std::vector<int> multiset;
  multiset.reserve(p.n);
  for (std::size_t x = 0; x < p.counts.size(); ++x)
    multiset.insert(multiset.end(), p.counts[x], static_cast<int>(x));
  cb.words.reserve(message_count);
  for (std::size_t k = 0; k < message_count; ++k) {
    SplitMix64 rng(substream_seed(seed, k));
    std::vector<int> word = multiset;
    for (std::size_t i = word.size(); i > 1; --i)
      std::swap(word[i - 1], word[rng.next_below(i)]);
    cb.words.push_back(std::move(word));
  }
  return cb;
}

// Empirical conditional type of y given x (base type taken from x).
inline ConditionalType empirical_cond_type(std::span<const int> x, std::span<const int> y,
                                           std::size_t input_size, std::size_t output_size) {
  ConditionalType v;
  v.base.n = static_cast<int>(x.size());
  v.base.counts.assign(input_size, 0);
  v.output_size = output_size;
  v.table.assign(input_size * output_size, 0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    ++v.base.counts[static_cast<std::size_t>(x[t])];
    ++v.table[static_cast<std::size_t>(x[t]) * output_size + static_cast<std::size_t>(y[t])];
  }
  return v;
}

inline double empirical_J(std::span<const int> x, std::span<const int> y, const Channel& ch) {
  ConditionalType v = empirical_cond_type(x, y, ch.input_size, ch.output_size);
  return functional_J(v.base.distribution(), v.distribution(), ch);
}

inline double empirical_mutual_info(std::span<const int> x, std::span<const int> y,
                                    const Channel& ch) {
  ConditionalType v = empirical_cond_type(x, y, ch.input_size, ch.output_size);
  return mutual_info(v.base.distribution(), v.distribution());
}

// Decodes to k iff exactly one codeword clears J(x(k);y|W) >= rate + gamma.
inline std::optional<std::size_t> threshold_decode(const Codebook& cb, const Channel& ch,
                                                   std::span<const int> y, double gamma) {
  double rate = std::log2(static_cast<double>(cb.message_count)) / cb.n;
  double threshold = rate + gamma;
  std::optional<std::size_t> hit;
  for (std::size_t k = 0; k < cb.words.size(); ++k) {
    if (empirical_J(cb.words[k], y, ch) >= threshold) {
      if (hit) return std::nullopt;  // two qualify: failure
      hit = k;
    }
  }
  return hit;
}

// Unique maximizer of the empirical mutual information; any tie decodes
// to failure (identical codewords therefore always fail).
inline std::optional<std::size_t> mmi_decode(const Codebook& cb, const Channel& ch,
                                             std::span<const int> y) {
  std::optional<std::size_t> best;
  double best_info = -kInf;
  bool tie = false;
  for (std::size_t k = 0; k < cb.words.size(); ++k) {
    double info = empirical_mutual_info(cb.words[k], y, ch);
    if (info > best_info) {
      best_info = info;
      best = k;
      tie = false;
    } else if (info == best_info) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

inline std::optional<std::size_t> decode(const Codebook& cb, const Channel& ch,
                                         std::span<const int> y, const DecoderSpec& spec) {
  return spec.kind == DecoderKind::threshold_J ? threshold_decode(cb, ch, y, spec.gamma)
                                               : mmi_decode(cb, ch, y);
}

inline constexpr std::uint64_t kExactErrorMaxOutputs = 1ull << 22;

inline std::uint64_t output_space_size(int n, std::size_t output_size) {
  std::uint64_t total = 1;
  for (int t = 0; t < n; ++t) {
    if (total > kExactErrorMaxOutputs) break;
    total *= output_size;
  }
  return total;
}

inline void unflatten_output(std::uint64_t flat, int n, std::size_t output_size,
                             std::vector<int>& y) {
  y.assign(n, 0);
  for (int t = n; t-- > 0;) {
    y[t] = static_cast<int>(flat % output_size);
    flat /= output_size;
  }
}

inline double word_channel_prob(const Channel& ch, std::span<const int> x,
                                std::span<const int> y) {
  double p = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t)
    p *= ch.w(static_cast<std::size_t>(x[t]), static_cast<std::size_t>(y[t]));
  return p;
}

// Decoded message per output string (-1 = declared failure), indexed by
// the mixed-radix output index with y[0] most significant.
inline std::vector<std::int64_t> decode_regions(const Codebook& cb, const Channel& ch,
                                                const DecoderSpec& spec) {
  std::uint64_t total = output_space_size(cb.n, ch.output_size);
  if (total > kExactErrorMaxOutputs) throw std::invalid_argument("instance too large");
  std::vector<std::int64_t> regions(total, -1);
  std::vector<int> y;
  for (std::uint64_t i = 0; i < total; ++i) {
    unflatten_output(i, cb.n, ch.output_size, y);
    auto k = decode(cb, ch, y, spec);
    regions[i] = k ? static_cast<std::int64_t>(*k) : -1;
  }
  return regions;
}

inline double exact_error_from_regions(const Codebook& cb, const Channel& ch,
                                       std::span<const std::int64_t> regions) {
  std::uint64_t total = output_space_size(cb.n, ch.output_size);
  if (regions.size() != total) throw std::invalid_argument("region table size mismatch");
  double err = 0.0;
  std::vector<int> y;
  for (std::uint64_t i = 0; i < total; ++i) {
    unflatten_output(i, cb.n, ch.output_size, y);
    for (std::size_t k = 0; k < cb.words.size(); ++k) {
      if (regions[i] != static_cast<std::int64_t>(k))
        err += word_channel_prob(ch, cb.words[k], y);
    }
  }
  // summing ~|Y|^n products leaves a few ulps of dust around 0 and 1
  return std::min(1.0, std::max(0.0, err / static_cast<double>(cb.message_count)));
}

// Exact average error by full output enumeration.
inline double exact_error(const Codebook& cb, const Channel& ch, const DecoderSpec& spec) {
  return exact_error_from_regions(cb, ch, decode_regions(cb, ch, spec));
}

inline double wilson_upper(std::uint64_t errors, std::uint64_t trials, double z = 1.959964) {
  if (trials == 0) return 1.0;
  double nt = static_cast<double>(trials);
  double p = static_cast<double>(errors) / nt;
  double z2 = z * z;
  double denom = 1.0 + z2 / nt;
  double center = (p + z2 / (2.0 * nt)) / denom;
  double rad = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / denom;
  return std::min(1.0, center + rad);
}

// Decoding errors over trials [trial_lo, trial_hi). Each trial draws a
// uniform message and a channel output from its own substream, so the
// count is identical for any thread split.
inline std::uint64_t count_decode_errors(const Codebook& cb, const Channel& ch,
                                         const DecoderSpec& spec, std::uint64_t trial_lo,
                                         std::uint64_t trial_hi, std::uint64_t seed,
                                         int threads = 1) {
  if (trial_hi <= trial_lo) return 0;
  std::uint64_t span = trial_hi - trial_lo;
  std::size_t workers = static_cast<std::size_t>(resolve_threads(threads));
  std::vector<std::uint64_t> partial(workers, 0);
  parallel_for(workers, static_cast<int>(workers), [&](std::size_t w) {
    std::uint64_t lo = trial_lo + span * w / workers;
    std::uint64_t hi = trial_lo + span * (w + 1) / workers;
    std::vector<int> y(cb.n);
    std::uint64_t errs = 0;
    for (std::uint64_t trial = lo; trial < hi; ++trial) {
      SplitMix64 rng(substream_seed(seed, trial));
      std::size_t k = static_cast<std::size_t>(rng.next_below(cb.message_count));
      const auto& x = cb.words[k];
      for (int t = 0; t < cb.n; ++t) {
        double u = rng.next_unit();
        double acc = 0.0;
        std::size_t pick = ch.output_size - 1;
        for (std::size_t yy = 0; yy < ch.output_size; ++yy) {
          acc += ch.w(static_cast<std::size_t>(x[t]), yy);
          if (u < acc) {
            pick = yy;
            break;
          }
        }
        y[t] = static_cast<int>(pick);
      }
      auto got = decode(cb, ch, y, spec);
      if (!got || *got != k) ++errs;
    }
    partial[w] = errs;
  });
  std::uint64_t total = 0;
  for (auto e : partial) total += e;
  return total;
}

// Seeded Monte Carlo estimate with a Wilson 95% upper bound attached.
inline SimResult estimate_error(const Codebook& cb, const Channel& ch, const DecoderSpec& spec,
                                std::uint64_t trials, std::uint64_t seed, int threads = 1) {
  if (trials < 1) throw std::invalid_argument("estimate_error: trials must be >= 1");
  SimResult r;
  r.trials = trials;
  r.errors = count_decode_errors(cb, ch, spec, 0, trials, seed, threads);
  r.estimate = static_cast<double>(r.errors) / static_cast<double>(trials);
  r.wilson_upper_95 = wilson_upper(r.errors, r.trials);
  r.decoder = spec.kind;
  r.gamma = spec.gamma;
  return r;
}

struct PropositionCheck {
  std::size_t message_count = 0;
  double rate_used = 0.0;       // (1/n) log2 M
  double tail = 0.0;
  double penalty = 0.0;
  double analytic_bound = 0.0;  // tail + penalty
  double min_observed_error = 1.0;
  double sigma = 0.0;
  bool violation = false;
  std::vector<double> attempt_errors;
};

// Random-coding existence check: draw several codebooks of composition
// P at |K_n| = 2^floor(nR), measure the matching decoder's error, and
// compare the best one against the proposition's right-hand side.
// trials = 0 evaluates each codebook exactly instead of sampling.
inline PropositionCheck check_proposition_achievability(const InputType& p, double rate,
                                                        double gamma, const Channel& ch,
                                                        DecoderKind variant, int attempts,
                                                        std::uint64_t trials, std::uint64_t seed,
                                                        int threads = 1) {
  int n = p.n;
  double nr = static_cast<double>(n) * rate;
  int log_m = std::max(0, static_cast<int>(std::floor(nr)));
  if (log_m > 40) throw std::invalid_argument("message set too large");
  std::size_t m = static_cast<std::size_t>(1) << log_m;

  PropositionCheck out;
  out.message_count = m;
  out.rate_used = static_cast<double>(log_m) / n;

  Spectrum s = build_spectrum(p, ch, threads);
  Functional sel = variant == DecoderKind::threshold_J ? Functional::J : Functional::I;
  out.tail = tail_prob(s, sel, out.rate_used + gamma, TailCmp::le);
  double const_log2 = variant == DecoderKind::threshold_J
                          ? kappa_log2(n, static_cast<int>(ch.input_size))
                          : eta_log2(n, static_cast<int>(ch.input_size),
                                     static_cast<int>(ch.output_size));
  out.penalty = std::exp2(const_log2 - static_cast<double>(n) * gamma);
  out.analytic_bound = out.tail + out.penalty;

  DecoderSpec spec{variant, gamma};
  for (int a = 0; a < attempts; ++a) {
    Codebook cb = generate_codebook(p, m, substream_seed(seed, 0x10000 + a));
    double err = trials > 0
                     ? estimate_error(cb, ch, spec, trials, substream_seed(seed, 0x20000 + a),
                                      threads)
                           .estimate
                     : exact_error(cb, ch, spec);
    out.attempt_errors.push_back(err);
    out.min_observed_error = std::min(out.min_observed_error, err);
  }
  if (trials > 0)
    out.sigma = std::sqrt(out.min_observed_error * (1.0 - out.min_observed_error) /
                          static_cast<double>(trials));
  out.violation = out.min_observed_error > out.analytic_bound + 3.0 * out.sigma;
  return out;
}

struct MetaConverseCheck {
  double exact_error = 0.0;
  double union_prob = 0.0;   // Pr of the union over l of the comparison events
  double penalty = 0.0;      // L 2^{-n gamma}
  double rhs = 0.0;          // union_prob - penalty
  double slack = 0.0;        // exact_error - rhs
  std::vector<double> deltas;
  double delta_bound = 0.0;  // 2^{-n gamma}
  bool holds = false;
};

// The comparison family: one distribution per output type, uniform over
// that type class (exact counts).
inline std::vector<std::vector<double>> output_type_q_family(int n, std::size_t output_size) {
  std::uint64_t total = output_space_size(n, output_size);
  if (total > kExactErrorMaxOutputs) throw std::invalid_argument("instance too large");
  auto out_types = enumerate_input_types(n, output_size);
  std::vector<std::vector<double>> family;
  family.reserve(out_types.size());
  std::vector<int> y;
  for (const auto& q : out_types) {
    double mass = 1.0 / std::exp2(log_type_class_size(q).log2_value);
    std::vector<double> qdist(total, 0.0);
    for (std::uint64_t i = 0; i < total; ++i) {
      unflatten_output(i, n, output_size, y);
      std::vector<int> counts(output_size, 0);
      for (int v : y) ++counts[static_cast<std::size_t>(v)];
      if (counts == q.counts) qdist[i] = mass;
    }
    family.push_back(std::move(qdist));
  }
  return family;
}

inline std::vector<double> code_output_distribution(const Codebook& cb, const Channel& ch) {
  std::uint64_t total = output_space_size(cb.n, ch.output_size);
  if (total > kExactErrorMaxOutputs) throw std::invalid_argument("instance too large");
  std::vector<double> q(total, 0.0);
  std::vector<int> y;
  for (std::uint64_t i = 0; i < total; ++i) {
    unflatten_output(i, cb.n, ch.output_size, y);
    for (const auto& w : cb.words) q[i] += word_channel_prob(ch, w, y);
    q[i] /= static_cast<double>(cb.message_count);
  }
  return q;
}

// Exact evaluation of both sides of the generalized meta-converse for
// an explicit code: P_e >= Pr{union_l A_l} - L 2^{-n gamma}, and each
// region leak Delta_l is at most 2^{-n gamma}.
inline MetaConverseCheck check_meta_converse(const Codebook& cb,
                                             std::span<const std::int64_t> regions,
                                             const Channel& ch, double gamma,
                                             const std::vector<std::vector<double>>& q_list) {
  std::uint64_t total = output_space_size(cb.n, ch.output_size);
  if (total > kExactErrorMaxOutputs) throw std::invalid_argument("instance too large");
  MetaConverseCheck out;
  out.exact_error = exact_error_from_regions(cb, ch, regions);
  out.delta_bound = std::exp2(-static_cast<double>(cb.n) * gamma);
  out.penalty = static_cast<double>(q_list.size()) * out.delta_bound;
  out.deltas.assign(q_list.size(), 0.0);

  double scale = static_cast<double>(cb.message_count) * out.delta_bound;
  double union_mass = 0.0;
  std::vector<int> y;
  for (std::size_t k = 0; k < cb.words.size(); ++k) {
    for (std::uint64_t i = 0; i < total; ++i) {
      unflatten_output(i, cb.n, ch.output_size, y);
      double wn = word_channel_prob(ch, cb.words[k], y);
      bool in_union = false;
      for (std::size_t l = 0; l < q_list.size(); ++l) {
        if (wn <= scale * q_list[l][i]) {
          in_union = true;
          if (regions[i] == static_cast<std::int64_t>(k)) out.deltas[l] += wn;
        }
      }
      if (in_union) union_mass += wn;
    }
  }
  double m = static_cast<double>(cb.message_count);
  union_mass /= m;
  for (auto& d : out.deltas) d /= m;
  out.union_prob = union_mass;
  out.rhs = out.union_prob - out.penalty;
  out.slack = out.exact_error - out.rhs;
  bool deltas_ok = true;
  for (double d : out.deltas)
    if (d > out.delta_bound + 1e-12) deltas_ok = false;
  out.holds = out.exact_error >= out.rhs - 1e-12 && deltas_ok;
  return out;
}

// Default comparison family: one uniform distribution per output type.
inline MetaConverseCheck check_meta_converse(const Codebook& cb,
                                             std::span<const std::int64_t> regions,
                                             const Channel& ch, double gamma) {
  return check_meta_converse(cb, regions, ch, gamma,
                             output_type_q_family(cb.n, ch.output_size));
}

}  // namespace fbb
