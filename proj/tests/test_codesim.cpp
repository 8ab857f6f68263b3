#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "fbb/codesim.hpp"
#include "fbb/rng.hpp"

using namespace fbb;

namespace {

InputType type_of_word(std::span<const int> w, std::size_t input_size) {
  InputType t;
  t.n = static_cast<int>(w.size());
  t.counts.assign(input_size, 0);
  for (int s : w) ++t.counts[static_cast<std::size_t>(s)];
  return t;
}

}  // namespace

TEST_CASE("codebook generation") {
  InputType p{2, {1, 1}};
  SUBCASE("words live in the type class") {
    Codebook cb = generate_codebook(p, 16, 42);
    for (const auto& w : cb.words) CHECK(type_of_word(w, 2) == p);
  }
  SUBCASE("same seed, same codebook") {
    Codebook a = generate_codebook(InputType{8, {5, 3}}, 64, 7);
    Codebook b = generate_codebook(InputType{8, {5, 3}}, 64, 7);
    CHECK(a.words == b.words);
    Codebook c = generate_codebook(InputType{8, {5, 3}}, 64, 8);
    CHECK(a.words != c.words);
  }
  SUBCASE("words are uniform over the class") {
    InputType comp{4, {2, 2}};
    Codebook cb = generate_codebook(comp, 6000, 3);
    std::map<std::vector<int>, int> freq;
    for (const auto& w : cb.words) ++freq[w];
    CHECK(freq.size() == 6);  // the whole class is hit
    double expect = 6000.0 / 6.0;
    double sigma = std::sqrt(6000.0 * (1.0 / 6.0) * (5.0 / 6.0));
    for (const auto& [w, c] : freq) CHECK(std::abs(c - expect) <= 4.0 * sigma);
  }
}

TEST_CASE("threshold decoder") {
  Channel noiseless = Channel::bsc(0.0);
  Codebook cb;
  cb.n = 2;
  cb.message_count = 2;
  cb.words = {{0, 1}, {1, 0}};
  cb.composition = InputType{2, {1, 1}};

  SUBCASE("unique qualifier decodes") {
    std::vector<int> y = {0, 1};
    auto k = threshold_decode(cb, noiseless, y, 0.2);
    REQUIRE(k.has_value());
    CHECK(*k == 0);
  }
  SUBCASE("no qualifier fails") {
    // threshold above the best possible J
    std::vector<int> y = {0, 1};
    CHECK_FALSE(threshold_decode(cb, noiseless, y, 10.0).has_value());
  }
  SUBCASE("two qualifiers fail") {
    Codebook dup;
    dup.n = 2;
    dup.message_count = 2;
    dup.words = {{0, 1}, {0, 1}};
    dup.composition = cb.composition;
    std::vector<int> y = {0, 1};
    CHECK_FALSE(threshold_decode(dup, noiseless, y, 0.2).has_value());
  }
  SUBCASE("noiseless exact error is zero for a suitable margin") {
    CHECK(exact_error(cb, noiseless, {DecoderKind::threshold_J, 0.2}) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("mmi decoder") {
  Channel bsc = Channel::bsc(0.1);
  SUBCASE("single message always decodes") {
    Codebook cb = generate_codebook(InputType{4, {2, 2}}, 1, 5);
    std::vector<int> y = {1, 1, 0, 0};
    auto k = mmi_decode(cb, bsc, y);
    REQUIRE(k.has_value());
    CHECK(*k == 0);
  }
  SUBCASE("identical codewords always tie") {
    Codebook dup;
    dup.n = 4;
    dup.message_count = 2;
    dup.words = {{0, 0, 1, 1}, {0, 0, 1, 1}};
    dup.composition = InputType{4, {2, 2}};
    CHECK(exact_error(dup, bsc, {DecoderKind::mmi, 0.0}) == doctest::Approx(1.0));
  }
  SUBCASE("noiseless with non-complementary words decodes cleanly") {
    Codebook cb;
    cb.n = 4;
    cb.message_count = 2;
    cb.words = {{0, 0, 1, 1}, {0, 1, 0, 1}};
    cb.composition = InputType{4, {2, 2}};
    CHECK(exact_error(cb, Channel::bsc(0.0), {DecoderKind::mmi, 0.0}) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("complementary words are information-identical and always tie") {
    // empirical mutual information cannot separate a word from its
    // complement, so this pair decodes to failure everywhere
    Codebook cb;
    cb.n = 2;
    cb.message_count = 2;
    cb.words = {{0, 1}, {1, 0}};
    cb.composition = InputType{2, {1, 1}};
    CHECK(exact_error(cb, Channel::bsc(0.0), {DecoderKind::mmi, 0.0}) == doctest::Approx(1.0));
  }
  SUBCASE("single-letter types make empirical information vanish") {
    Codebook cb;
    cb.n = 1;
    cb.message_count = 2;
    cb.words = {{0}, {1}};
    cb.composition = InputType{1, {1, 0}};
    CHECK(exact_error(cb, bsc, {DecoderKind::mmi, 0.0}) == doctest::Approx(1.0));
  }
}

TEST_CASE("exact error at n=2 with degenerate compositions is symmetric") {
  Channel bsc = Channel::bsc(0.2);
  Codebook cb;
  cb.n = 2;
  cb.message_count = 2;
  cb.words = {{0, 0}, {1, 1}};
  cb.composition = InputType{2, {2, 0}};
  auto regions = decode_regions(cb, bsc, {DecoderKind::mmi, 0.0});
  std::vector<int> y;
  double err0 = 0.0, err1 = 0.0;
  for (std::uint64_t i = 0; i < regions.size(); ++i) {
    unflatten_output(i, 2, 2, y);
    if (regions[i] != 0) err0 += word_channel_prob(bsc, cb.words[0], y);
    if (regions[i] != 1) err1 += word_channel_prob(bsc, cb.words[1], y);
  }
  CHECK(err0 == doctest::Approx(err1).epsilon(1e-12));
  CHECK(exact_error_from_regions(cb, bsc, regions) == doctest::Approx(0.5 * (err0 + err1)));
}

TEST_CASE("estimate agrees with exact error") {
  Channel bsc = Channel::bsc(0.1);
  SUBCASE("noiseless threshold run sees no errors") {
    Codebook cb;
    cb.n = 2;
    cb.message_count = 2;
    cb.words = {{0, 1}, {1, 0}};
    cb.composition = InputType{2, {1, 1}};
    SimResult r = estimate_error(cb, Channel::bsc(0.0), {DecoderKind::threshold_J, 0.2}, 2000, 11);
    CHECK(r.errors == 0);
  }
  SUBCASE("deterministic given the seed and split-invariant across threads") {
    Codebook cb = generate_codebook(InputType{6, {3, 3}}, 4, 21);
    SimResult a = estimate_error(cb, bsc, {DecoderKind::mmi, 0.0}, 5000, 17, 1);
    SimResult b = estimate_error(cb, bsc, {DecoderKind::mmi, 0.0}, 5000, 17, 3);
    CHECK(a.errors == b.errors);
    CHECK(a.estimate == b.estimate);
  }
  SUBCASE("Wilson interval coverage over seeded runs") {
    int covered = 0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
      Codebook cb = generate_codebook(InputType{6, {3, 3}}, 4, substream_seed(1000, run));
      DecoderSpec spec{DecoderKind::mmi, 0.0};
      double exact = exact_error(cb, bsc, spec);
      CHECK((exact >= 0.0 && exact <= 1.0));
      SimResult est = estimate_error(cb, bsc, spec, 2000, substream_seed(2000, run));
      double z = 1.959964;
      double nt = static_cast<double>(est.trials);
      double p = est.estimate, z2 = z * z;
      double denom = 1.0 + z2 / nt;
      double center = (p + z2 / (2.0 * nt)) / denom;
      double rad = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / denom;
      if (exact >= center - rad - 1e-12 && exact <= center + rad + 1e-12) ++covered;
      CHECK(est.wilson_upper_95 == doctest::Approx(std::min(1.0, center + rad)).epsilon(1e-12));
    }
    // 95% nominal coverage with a floor of 93 out of 100
    CHECK(covered >= 93);
  }
}

TEST_CASE("proposition achievability checks") {
  Channel bsc = Channel::bsc(0.1);
  SUBCASE("exact evaluation over 32 codebooks") {
    auto rep = check_proposition_achievability(InputType{8, {4, 4}}, 0.25, 0.2, bsc,
                                               DecoderKind::threshold_J, 32, 0, 99, 2);
    CHECK(rep.message_count == 4);
    CHECK(rep.rate_used == doctest::Approx(0.25));
    CHECK_FALSE(rep.violation);
    CHECK(rep.attempt_errors.size() == 32);
    for (double e : rep.attempt_errors) CHECK((e >= 0.0 && e <= 1.0));
    CHECK(rep.min_observed_error <= rep.analytic_bound);
  }
  SUBCASE("mmi variant") {
    auto rep = check_proposition_achievability(InputType{8, {4, 4}}, 0.25, 0.2, bsc,
                                               DecoderKind::mmi, 32, 0, 99, 2);
    CHECK_FALSE(rep.violation);
  }
  SUBCASE("vacuous bound when the rate dominates every atom") {
    auto rep = check_proposition_achievability(InputType{6, {3, 3}}, 2.5, 0.2, bsc,
                                               DecoderKind::threshold_J, 2, 0, 7);
    CHECK(rep.analytic_bound >= 1.0);
    CHECK_FALSE(rep.violation);
  }
}

TEST_CASE("type-class output mixture obeys the kappa bound") {
  // Q(y) = |T_P|^{-1} sum_{x in T_P} W^n(y|x) must satisfy, for (x,y)
  // of joint type (P,V):
  //   Q(y) <= kappa_n(|X|) 2^{-n[H(PV)+D(PV||PW)]}
  //   Q(y)/W^n(y|x) <= kappa_n(|X|) 2^{-n J(P,V|W)}
  for (double cross : {0.1, 0.35}) {
    Channel ch;
    ch.input_size = ch.output_size = 2;
    ch.matrix = {0.8, 0.2, cross, 1.0 - cross};
    ch.cost = {0.0, 0.0};
    int n = 6;
    InputType p{n, {3, 3}};
    double kap = std::exp2(kappa_log2(n, 2));

    // all members of T_P
    std::vector<std::vector<int>> members;
    std::uint64_t seqs = output_space_size(n, 2);
    std::vector<int> x;
    for (std::uint64_t i = 0; i < seqs; ++i) {
      unflatten_output(i, n, 2, x);
      int ones = 0;
      for (int s : x) ones += s;
      if (ones == 3) members.push_back(x);
    }
    REQUIRE(members.size() == 20);

    auto q_mix = [&](std::span<const int> y) {
      double q = 0.0;
      for (const auto& m : members) q += word_channel_prob(ch, m, y);
      return q / static_cast<double>(members.size());
    };

    Distribution pd = p.distribution();
    Distribution pw = output_distribution(pd, ch.rows());
    for_each_conditional_type(p, 2, [&](const ConditionalType& v) {
      // a representative (x0, y0) with this joint type
      std::vector<int> x0, y0;
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
          for (int rep = 0; rep < v.at(a, b); ++rep) {
            x0.push_back(static_cast<int>(a));
            y0.push_back(static_cast<int>(b));
          }
        }
      }
      ConditionalDistribution vd = v.distribution();
      Distribution pv = output_distribution(pd, vd);
      double h_pv = entropy(pv);
      double d_pv_pw = 0.0;
      for (std::size_t b = 0; b < 2; ++b)
        if (pv[b] > 0.0) d_pv_pw += pv[b] * std::log2(pv[b] / pw[b]);
      double q = q_mix(y0);
      CHECK(q <= kap * std::exp2(-n * (h_pv + d_pv_pw)) * (1.0 + 1e-9));
      double wn = word_channel_prob(ch, x0, y0);
      double j = functional_J(pd, vd, ch);
      CHECK(q / wn <= kap * std::exp2(-n * j) * (1.0 + 1e-9));
    });
  }
}

TEST_CASE("meta-converse checks") {
  Channel bsc = Channel::bsc(0.1);
  Codebook cb = generate_codebook(InputType{3, {2, 1}}, 2, 31);
  DecoderSpec spec{DecoderKind::mmi, 0.0};
  auto regions = decode_regions(cb, bsc, spec);

  // every output maps to exactly one outcome (a message or failure)
  REQUIRE(regions.size() == output_space_size(3, 2));
  for (auto r : regions) CHECK((r >= -1 && r < static_cast<std::int64_t>(cb.message_count)));

  SUBCASE("single comparison distribution: the code's own output law") {
    std::vector<std::vector<double>> qs = {code_output_distribution(cb, bsc)};
    auto rep = check_meta_converse(cb, regions, bsc, 0.3, qs);
    CHECK(rep.holds);
    CHECK(rep.slack >= -1e-12);
    CHECK(rep.deltas.size() == 1);
    CHECK(rep.deltas[0] <= rep.delta_bound + 1e-12);
  }
  SUBCASE("large gamma makes the right side trivial") {
    std::vector<std::vector<double>> qs = {code_output_distribution(cb, bsc)};
    auto rep = check_meta_converse(cb, regions, bsc, 8.0, qs);
    CHECK(rep.rhs <= 0.0);
    CHECK(rep.holds);
  }
  SUBCASE("output-type family") {
    auto family = output_type_q_family(3, 2);
    CHECK(family.size() == 4);  // |P_3(Y)| = nu_3(2)
    for (const auto& q : family) {
      double mass = 0.0;
      for (double v : q) mass += v;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto rep = check_meta_converse(cb, regions, bsc, 0.4, family);
    CHECK(rep.holds);
    // the overload without a family defaults to exactly this one
    auto dflt = check_meta_converse(cb, regions, bsc, 0.4);
    CHECK(dflt.union_prob == rep.union_prob);
    CHECK(dflt.rhs == rep.rhs);
  }
}
