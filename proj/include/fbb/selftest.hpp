#pragma once

// Small-n invariant suites behind the `selftest` CLI command. Each
// suite reruns the load-bearing identities of one module; the optional
// fault injection corrupts the type-counting constant so the harness
// itself can be shown to catch a broken build.

#include <cmath>
#include <string>
#include <vector>

#include "fbb/bounds.hpp"
#include "fbb/channel.hpp"
#include "fbb/codesim.hpp"
#include "fbb/rng.hpp"
#include "fbb/spectrum.hpp"
#include "fbb/typeclass.hpp"

namespace fbb {

struct SelftestOptions {
  int threads = 1;
  std::uint64_t seed = 0x5eedf00dull;
  // Pretends kappa_n is 2^shift times smaller in the type-counting
  // suite; any nonzero shift must make the suite fail.
  double kappa_shift_log2 = 0.0;
};

struct SuiteResult {
  std::string name;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;
};

namespace detail {

struct SuiteRecorder {
  SuiteResult result;
  explicit SuiteRecorder(std::string name) { result.name = std::move(name); }
  void check(bool ok, const std::string& what) {
    if (ok) {
      ++result.passed;
    } else {
      ++result.failed;
      if (result.failures.size() < 8) result.failures.push_back(what);
    }
  }
};

inline Distribution random_distribution(SplitMix64& rng, std::size_t m) {
  Distribution p;
  p.probs.resize(m);
  double sum = 0.0;
  for (auto& v : p.probs) {
    v = 0.05 + rng.next_unit();
    sum += v;
  }
  for (auto& v : p.probs) v /= sum;
  return p;
}

inline Channel random_channel(SplitMix64& rng, std::size_t nx, std::size_t ny) {
  Channel ch;
  ch.input_size = nx;
  ch.output_size = ny;
  ch.matrix.resize(nx * ny);
  ch.cost.assign(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      double v = 0.05 + rng.next_unit();
      ch.matrix[x * ny + y] = v;
      sum += v;
    }
    for (std::size_t y = 0; y < ny; ++y) ch.matrix[x * ny + y] /= sum;
  }
  return ch;
}

inline ConditionalDistribution random_conditional(SplitMix64& rng, std::size_t nx,
                                                  std::size_t ny) {
  return random_channel(rng, nx, ny).rows();
}

}  // namespace detail

inline SuiteResult selftest_channel_measures(const SelftestOptions& opts) {
  detail::SuiteRecorder rec("channel-measures");
  SplitMix64 rng(substream_seed(opts.seed, 1));
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t nx = 2 + rng.next_below(2);
    std::size_t ny = 2 + rng.next_below(2);
    Channel ch = detail::random_channel(rng, nx, ny);
    Distribution p = detail::random_distribution(rng, nx);
    ConditionalDistribution v = detail::random_conditional(rng, nx, ny);
    double fu = functional_underline_I(p, v, ch);
    double fj = functional_J(p, v, ch);
    double fi = mutual_info(p, v);
    rec.check(fu <= fj + 1e-10 && fj <= fi + 1e-10, "functional sandwich violated");
    Distribution pv = output_distribution(p, v);
    Distribution pw = output_distribution(p, ch.rows());
    double dpv = 0.0;
    for (std::size_t y = 0; y < ny; ++y)
      if (pv[y] > 0.0) dpv += pv[y] * std::log2(pv[y] / pw[y]);
    rec.check(std::abs(fj - fu - dpv) < 1e-10, "decomposition identity violated");
    rec.check(fi >= 0.0, "negative mutual information");
  }
  {
    Channel bsc = Channel::bsc(0.1);
    double h2 = -0.1 * std::log2(0.1) - 0.9 * std::log2(0.9);
    double cap = capacity(bsc).value_bits;
    rec.check(std::abs(cap - (1.0 - h2)) < 1e-6, "BSC capacity mismatch");
  }
  return rec.result;
}

inline SuiteResult selftest_type_counting(const SelftestOptions& opts) {
  detail::SuiteRecorder rec("type-counting");
  for (int n = 1; n <= 8; ++n) {
    for (std::size_t a = 2; a <= 3; ++a) {
      auto types = enumerate_input_types(n, a);
      rec.check(types.size() == nu(n, static_cast<int>(a)).exact_value->to_u64(),
                "type count != nu");
      BigUint sum(0);
      for (const auto& t : types) sum += *log_type_class_size(t).exact_value;
      rec.check(sum == BigUint::pow(static_cast<std::uint32_t>(a), static_cast<unsigned>(n)),
                "class sizes do not sum to |X|^n");
    }
  }
  for (int n = 2; n <= 10; n += 2) {
    double kap = kappa_log2(n, 2) + opts.kappa_shift_log2;
    double kap_joint = kappa_log2(n, 4) + opts.kappa_shift_log2;
    for (const auto& p : enumerate_input_types(n, 2)) {
      double h = entropy(p.distribution()) * n;
      double size = log_type_class_size(p).log2_value;
      rec.check(size <= h + 1e-9 && size >= h - kap - 1e-9, "type class size sandwich violated");
      for_each_conditional_type(p, 2, [&](const ConditionalType& v) {
        double hv = conditional_entropy(v.distribution(), p.distribution()) * n;
        double cs = log_cond_type_class_size(v).log2_value;
        rec.check(cs <= hv + 1e-9 && cs >= hv - kap_joint - 1e-9,
                  "conditional class size sandwich violated");
      });
    }
  }
  return rec.result;
}

inline SuiteResult selftest_spectrum(const SelftestOptions& opts) {
  detail::SuiteRecorder rec("spectrum");
  SplitMix64 rng(substream_seed(opts.seed, 2));
  for (int trial = 0; trial < 8; ++trial) {
    Channel ch = detail::random_channel(rng, 2, 2);
    int n = 2 + static_cast<int>(rng.next_below(2));
    for (const auto& p : enumerate_input_types(n, 2)) {
      Spectrum s = build_spectrum(p, ch);
      rec.check(std::abs(std::exp2(s.total_mass_log2()) - 1.0) < 1e-9,
                "spectrum mass not normalized");
      // brute force over output strings from an explicit representative
      std::vector<int> x;
      for (std::size_t sym = 0; sym < p.counts.size(); ++sym)
        x.insert(x.end(), p.counts[sym], static_cast<int>(sym));
      std::uint64_t total = output_space_size(n, 2);
      std::vector<int> y;
      for (const auto& atom : s.atoms) {
        double mass = 0.0;
        for (std::uint64_t i = 0; i < total; ++i) {
          unflatten_output(i, n, 2, y);
          if (empirical_cond_type(x, y, 2, 2) == atom.cond_type)
            mass += word_channel_prob(ch, x, y);
        }
        rec.check(std::abs(mass - std::exp2(atom.log2_prob)) < 1e-12,
                  "atom mass != brute force");
        rec.check(atom.f_underline <= atom.f_J + 1e-10 && atom.f_J <= atom.f_I + 1e-10,
                  "atom functional sandwich violated");
      }
    }
  }
  {
    Channel ch = Channel::bsc(0.2);
    InputType p{40, {23, 17}};
    Spectrum s = build_spectrum(p, ch, opts.threads);
    rec.check(std::abs(std::exp2(s.total_mass_log2()) - 1.0) < 1e-9,
              "mass not normalized at n=40");
    double t1 = tail_prob(s, Functional::J, 0.3);
    double t2 = tail_prob(s, Functional::J, 0.5);
    rec.check(t1 <= t2, "tail not monotone");
  }
  return rec.result;
}

inline SuiteResult selftest_bounds(const SelftestOptions& opts) {
  detail::SuiteRecorder rec("bounds");
  {
    Channel noiseless = Channel::bsc(0.0);
    BoundResult r = compute_bound({100, 1.1, kInf, BoundVariant::converse_underline}, noiseless,
                                  opts.threads);
    rec.check(std::abs(r.raw - (1.0 - 101.0 / 1024.0)) < 1e-9, "noiseless anchor value");
    rec.check(std::abs(r.gamma_star - 0.1) < 1e-9, "noiseless anchor gamma");
    rec.check(r.type_star.counts == std::vector<int>{50, 50}, "noiseless anchor type");
  }
  Channel bsc = Channel::bsc(0.1);
  for (double rate : {0.3, 0.6, 0.9}) {
    auto rows = compute_bounds(20, rate, kInf, all_variants(), bsc, opts.threads);
    for (const auto& r : rows)
      rec.check(r.value >= 0.0 && r.value <= 1.0, "bound value outside [0,1]");
    rec.check(rows[0].value <= rows[2].value + 1e-12 && rows[0].value <= rows[3].value + 1e-12,
              "converse above achievability");
  }
  return rec.result;
}

inline SuiteResult selftest_codesim(const SelftestOptions& opts) {
  detail::SuiteRecorder rec("codesim");
  Channel bsc = Channel::bsc(0.1);
  InputType comp{6, {3, 3}};
  Codebook cb = generate_codebook(comp, 4, substream_seed(opts.seed, 3));
  Codebook cb2 = generate_codebook(comp, 4, substream_seed(opts.seed, 3));
  rec.check(cb.words == cb2.words, "codebook not deterministic");
  for (const auto& w : cb.words) {
    InputType t{6, {0, 0}};
    for (int sym : w) ++t.counts[static_cast<std::size_t>(sym)];
    rec.check(t == comp, "codeword composition mismatch");
  }
  DecoderSpec mmi{DecoderKind::mmi, 0.0};
  double exact = exact_error(cb, bsc, mmi);
  SimResult est = estimate_error(cb, bsc, mmi, 20000, substream_seed(opts.seed, 4), opts.threads);
  rec.check(std::abs(est.estimate - exact) < 4.0 * std::sqrt(exact * (1 - exact) / 20000.0) + 1e-3,
            "estimate far from exact error");
  SplitMix64 rng(substream_seed(opts.seed, 5));
  for (int trial = 0; trial < 5; ++trial) {
    int n = 3;
    std::size_t m = 2;
    InputType comp3{n, {2, 1}};
    Codebook rc = generate_codebook(comp3, m, rng.next());
    DecoderSpec spec{DecoderKind::mmi, 0.0};
    auto regions = decode_regions(rc, bsc, spec);
    double pe = exact_error_from_regions(rc, bsc, regions);
    std::vector<InputType> comps(m, comp3);
    for (int gi = 1; gi <= 10; ++gi) {
      double gamma = 0.1 * gi;
      double lhs = proposition1_lower_bound(comps, std::log2(double(m)) / n, gamma, bsc);
      rec.check(lhs <= pe + 1e-12, "converse bound exceeds true error");
    }
    auto q_family = output_type_q_family(n, 2);
    auto meta = check_meta_converse(rc, regions, bsc, 0.4, q_family);
    rec.check(meta.holds, "meta-converse inequality violated");
  }
  return rec.result;
}

inline std::vector<SuiteResult> run_selftest(const SelftestOptions& opts) {
  return {selftest_channel_measures(opts), selftest_type_counting(opts),
          selftest_spectrum(opts), selftest_bounds(opts), selftest_codesim(opts)};
}

}  // namespace fbb
