#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fbb/typeclass.hpp"

using namespace fbb;

namespace {

// independent oracle: collect the distinct types of all |X|^n sequences
std::set<std::vector<int>> types_by_sequence_scan(int n, std::size_t a) {
  std::set<std::vector<int>> out;
  std::vector<int> seq(n, 0);
  for (;;) {
    std::vector<int> counts(a, 0);
    for (int s : seq) ++counts[static_cast<std::size_t>(s)];
    out.insert(counts);
    int pos = n - 1;
    while (pos >= 0 && seq[pos] == static_cast<int>(a) - 1) seq[pos--] = 0;
    if (pos < 0) break;
    ++seq[pos];
  }
  return out;
}

}  // namespace

TEST_CASE("input type enumeration") {
  SUBCASE("order and shape at n=2") {
    auto types = enumerate_input_types(2, 2);
    REQUIRE(types.size() == 3);
    CHECK(types[0].counts == std::vector<int>{2, 0});
    CHECK(types[1].counts == std::vector<int>{1, 1});
    CHECK(types[2].counts == std::vector<int>{0, 2});
  }
  SUBCASE("cost filter") {
    double cost[2] = {0.0, 1.0};
    auto types = enumerate_input_types(4, 2, cost, 0.25);
    REQUIRE(types.size() == 2);
    CHECK(types[0].counts == std::vector<int>{4, 0});
    CHECK(types[1].counts == std::vector<int>{3, 1});
  }
  SUBCASE("count matches the stars-and-bars formula") {
    CHECK(enumerate_input_types(10, 3).size() == 66);
  }
  SUBCASE("set-equality against a sequence scan, no duplicates") {
    for (int n = 1; n <= 5; ++n) {
      for (std::size_t a : {2u, 3u}) {
        auto types = enumerate_input_types(n, a);
        std::set<std::vector<int>> seen;
        for (const auto& t : types) CHECK(seen.insert(t.counts).second);
        CHECK(seen == types_by_sequence_scan(n, a));
      }
    }
  }
}

TEST_CASE("conditional type enumeration") {
  SUBCASE("degenerate base row") {
    InputType p{2, {2, 0}};
    auto vs = enumerate_conditional_types(p, 2);
    REQUIRE(vs.size() == 3);
    for (const auto& v : vs) {
      CHECK(v.at(1, 0) == 0);
      CHECK(v.at(1, 1) == 0);
      CHECK(v.at(0, 0) + v.at(0, 1) == 2);
    }
  }
  SUBCASE("product structure") {
    CHECK(enumerate_conditional_types(InputType{2, {1, 1}}, 2).size() == 4);
    CHECK(enumerate_conditional_types(InputType{6, {3, 3}}, 2).size() == 16);
  }
  SUBCASE("row sums match the base counts") {
    InputType p{5, {2, 3}};
    for_each_conditional_type(p, 3, [&](const ConditionalType& v) {
      for (std::size_t x = 0; x < 2; ++x) {
        int sum = 0;
        for (std::size_t y = 0; y < 3; ++y) sum += v.at(x, y);
        CHECK(sum == p.counts[x]);
      }
    });
  }
  SUBCASE("exact count is bounded by nu_n(|X||Y|)") {
    for (int n = 1; n <= 8; ++n) {
      for (const auto& p : enumerate_input_types(n, 2)) {
        ConditionalTypeEnumerator en(p, 2);
        CHECK(static_cast<double>(en.count()) <= std::exp2(nu(n, 4).log2_value) + 0.5);
      }
    }
  }
}

TEST_CASE("type class sizes") {
  CHECK(log_type_class_size(InputType{4, {2, 2}}).exact_value->to_u64() == 6);
  CHECK(log_type_class_size(InputType{3, {3, 0}}).exact_value->to_u64() == 1);
  CHECK(log_type_class_size(InputType{12, {4, 4, 4}}).exact_value->to_u64() == 34650);

  // log2 agrees with the exact count
  for (const auto& p : enumerate_input_types(12, 3)) {
    LogCount lc = log_type_class_size(p);
    CHECK(std::abs(lc.log2_value - lc.exact_value->log2()) < 1e-9);
  }

  // beyond the exact range, only log2 (checked against a direct sum)
  LogCount big = log_type_class_size(InputType{70, {35, 35}});
  CHECK_FALSE(big.exact_value.has_value());
  double direct = 0.0;
  for (int i = 1; i <= 35; ++i) direct += std::log2(static_cast<double>(35 + i) / i);
  CHECK(big.log2_value == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("conditional type class sizes") {
  // identity table: outputs fully determined by positions
  ConditionalType ident{InputType{4, {2, 2}}, 2, {2, 0, 0, 2}};
  CHECK(log_cond_type_class_size(ident).exact_value->to_u64() == 1);

  ConditionalType one_flip{InputType{2, {2, 0}}, 2, {1, 1, 0, 0}};
  CHECK(log_cond_type_class_size(one_flip).exact_value->to_u64() == 2);

  ConditionalType both{InputType{4, {2, 2}}, 2, {1, 1, 1, 1}};
  CHECK(log_cond_type_class_size(both).exact_value->to_u64() == 4);
}

TEST_CASE("counting identities") {
  SUBCASE("type class sizes partition the sequence space") {
    for (int n = 1; n <= 10; ++n) {
      for (std::size_t a : {2u, 3u}) {
        BigUint sum(0);
        for (const auto& p : enumerate_input_types(n, a))
          sum += *log_type_class_size(p).exact_value;
        CHECK(sum == BigUint::pow(static_cast<std::uint32_t>(a), static_cast<unsigned>(n)));
      }
    }
  }
  SUBCASE("number of types equals nu") {
    for (int n = 1; n <= 10; ++n)
      for (int a = 2; a <= 3; ++a)
        CHECK(enumerate_input_types(n, static_cast<std::size_t>(a)).size() ==
              nu(n, a).exact_value->to_u64());
  }
  SUBCASE("conditional class sizes partition the output space") {
    for (int n = 1; n <= 8; ++n) {
      for (const auto& p : enumerate_input_types(n, 2)) {
        BigUint sum(0);
        for_each_conditional_type(
            p, 2, [&](const ConditionalType& v) { sum += *log_cond_type_class_size(v).exact_value; });
        CHECK(sum == BigUint::pow(2, static_cast<unsigned>(n)));
      }
    }
  }
}

TEST_CASE("counting sandwiches at n = 12") {
  int n = 12;
  double kap_x = kappa_log2(n, 2);
  double kap_xy = kappa_log2(n, 4);
  for (const auto& p : enumerate_input_types(n, 2)) {
    double nh = n * entropy(p.distribution());
    double size = log_type_class_size(p).log2_value;
    CHECK(size <= nh + 1e-9);
    CHECK(size >= nh - kap_x - 1e-9);
    for_each_conditional_type(p, 2, [&](const ConditionalType& v) {
      double nhv = n * conditional_entropy(v.distribution(), p.distribution());
      double csize = log_cond_type_class_size(v).log2_value;
      CHECK(csize <= nhv + 1e-9);
      CHECK(csize >= nhv - kap_xy - 1e-9);
    });
  }
}

TEST_CASE("nu, kappa, eta") {
  CHECK(nu(4, 2).exact_value->to_u64() == 5);
  for (int n = 1; n <= 50; ++n)
    for (int a = 1; a <= 5; ++a)
      CHECK(nu(n, a).log2_value <= (a - 1) * std::log2(n + 1.0) + 1e-9);

  double expected = kLog2E / 6.0 + 0.5 * std::log2(200.0 * std::numbers::pi);
  CHECK(kappa_log2(100, 2) == doctest::Approx(expected).epsilon(1e-12));

  CHECK(eta_log2(10, 2, 3) ==
        doctest::Approx(kappa_log2(10, 2) + nu(10, 6).log2_value).epsilon(1e-12));
}

TEST_CASE("big integer basics") {
  CHECK(BigUint::binomial(5, 2).to_u64() == 10);
  CHECK(BigUint::pow(3, 10).to_u64() == 59049);
  BigUint fact(1);
  for (std::uint32_t i = 1; i <= 30; ++i) fact *= i;
  CHECK(fact.to_string() == "265252859812191058636308480000000");
  CHECK(fact.log2() == doctest::Approx(std::lgamma(31.0) * kLog2E).epsilon(1e-12));

  // Pascal triangle cross-check
  for (std::uint32_t n = 1; n <= 20; ++n)
    for (std::uint32_t k = 1; k < n; ++k) {
      BigUint lhs = BigUint::binomial(n, k);
      BigUint rhs = BigUint::binomial(n - 1, k - 1);
      rhs += BigUint::binomial(n - 1, k);
      CHECK(lhs == rhs);
    }
}
