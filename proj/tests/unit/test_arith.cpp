#include <cmath>
#include <numbers>

#include "doctest.h"
#include "khintchine/bigint.hpp"
#include "khintchine/constants.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/factored.hpp"
#include "khintchine/rng.hpp"
#include "khintchine/smooth.hpp"
#include "oracles/oracles.hpp"

using namespace khintchine;
using namespace khintchine::arith;

TEST_CASE("primality and factorization") {
  CHECK(is_prime(2));
  CHECK(is_prime(1'000'000'007ULL));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(561));
  CHECK(is_prime(18446744073709551557ULL));
  auto f = factorize(2ULL * 2 * 3 * 1'000'000'007ULL);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == std::pair<std::uint64_t, std::uint32_t>{2, 2});
  CHECK(f[2].first == 1'000'000'007ULL);
}

TEST_CASE("prime stream matches trial division") {
  PrimeStream ps(1, 20000, 512);
  std::uint64_t p, count = 0, last = 0;
  while (ps.next(p)) {
    CHECK(is_prime(p));
    CHECK(p > last);
    last = p;
    ++count;
  }
  CHECK(count == 2262);
  std::size_t n = 0;
  for (std::uint64_t q = 1'000'000'000; q <= 1'000'000'100; ++q) n += is_prime(q);
  CHECK(primes_in(1'000'000'000, 1'000'000'100).size() == n);
}

TEST_CASE("basis validation") {
  CHECK_THROWS_AS(PrimeBasis({2, 4}), DomainError);
  CHECK_THROWS_AS(PrimeBasis({3, 2}), DomainError);
  CHECK_THROWS_AS(PrimeBasis(std::vector<std::uint64_t>{}), DomainError);
}

TEST_CASE("gcd examples") {
  auto B = make_basis({2, 3});
  auto g = gcd(FactoredNat(B, {3, 1}), FactoredNat(B, {1, 2}));
  CHECK(g.exponents() == std::vector<std::uint32_t>{1, 1});
  CHECK(gcd(FactoredNat(B, {5, 0}), FactoredNat(B, {0, 4})).log() == 0.0);

  auto B2 = make_basis({2});
  FactoredNat a(B2, {100}, PrimePower{7, 1}), b(B2, {40}, PrimePower{11, 1});
  auto gg = gcd(a, b);
  CHECK(to_bigint(gg) == oracle::big_gcd(to_bigint(a), to_bigint(b)));
  CHECK(to_bigint(gg) == oracle::big_pow(2, 40));

  CHECK_THROWS_AS(gcd(FactoredNat(B, {1, 0}), FactoredNat(B2, {1})), ConfigError);
}

TEST_CASE("gcd_ratio_log against big-integer oracle") {
  auto B = make_basis({2, 3, 5, 7});
  CounterRng rng(42);
  CHECK(gcd_ratio_log(FactoredNat(B, {3, 0, 0, 0}), FactoredNat(B, {5, 0, 0, 0})) ==
        doctest::Approx(-2 * std::numbers::ln2).epsilon(1e-14));
  for (int it = 0; it < 300; ++it) {
    std::vector<std::uint32_t> ea(4), eb(4);
    for (int i = 0; i < 4; ++i) {
      ea[i] = static_cast<std::uint32_t>(rng.below(40));
      eb[i] = static_cast<std::uint32_t>(rng.below(40));
    }
    FactoredNat a(B, ea), b(B, eb);
    const auto big_a = to_bigint(a), big_b = to_bigint(b);
    const double expect = oracle::big_log(oracle::big_gcd(big_a, big_b)) - oracle::big_log(big_b);
    CHECK(std::abs(gcd_ratio_log(a, b) - expect) <= 1e-10);
    CHECK(gcd_ratio_log(a, a) == 0.0);
    // lattice laws
    CHECK(gcd(a, b) == gcd(b, a));
    CHECK(divides(gcd(a, b), a));
    CHECK(divides(gcd(a, b), b));
    CHECK(gcd(a, a) == a);
    // log accuracy
    CHECK(std::abs(a.log() - oracle::big_log(big_a)) <= 1e-10 * std::max(1.0, a.log()));
  }
}

TEST_CASE("exact comparison breaks near-ties") {
  auto B = make_basis({2, 3});
  // 3^53 vs 2^84: close in magnitude but distinct
  FactoredNat a(B, {0, 53}), b(B, {84, 0});
  const auto ord = compare(a, b);
  CHECK((ord < 0) == (to_bigint(a) < to_bigint(b)));
  CHECK(compare(a, a) == std::strong_ordering::equal);
  FactoredNat c(B, {2, 1});
  CHECK(c.to_u64() == 12);
  CHECK(FactoredNat::from_u64(B, 12) == c);
  CHECK(FactoredNat::from_u64(B, 12 * 49).extra()->prime == 7);
  CHECK_THROWS_AS(FactoredNat::from_u64(B, 35), DomainError);
  CHECK_THROWS_AS(FactoredNat(B, {70, 0}).to_u64(), RangeError);
  CHECK(FactoredNat(B, {62, 0}).fits_machine());
  CHECK_FALSE(FactoredNat(B, {63, 0}).fits_machine());
}

TEST_CASE("pi_S") {
  CHECK(pi_S(PrimeBasis({2, 3}), 10) == 7);
  CHECK(pi_S(PrimeBasis({2, 3, 5}), 1) == 1);
  CHECK(pi_S(PrimeBasis({2}), 8) == 4);
  CHECK_THROWS_AS(pi_S(PrimeBasis({2}), 0.5), DomainError);
  for (std::vector<std::uint64_t> ps : {std::vector<std::uint64_t>{2, 3}, {2, 5, 7}, {3, 5, 7, 11}}) {
    for (std::uint64_t X : {2u, 17u, 1000u, 54321u}) {
      CHECK(pi_S(PrimeBasis(ps), static_cast<double>(X)) == oracle::smooth_count_bruteforce(ps, X));
    }
  }
}

TEST_CASE("pi_S_bound") {
  CHECK(pi_S_bound(2, 10) == doctest::Approx(15.30).epsilon(1e-3));
  CHECK(pi_S_bound(1, 2) == doctest::Approx(2.0));
  CHECK(pi_S(PrimeBasis({2, 3}), 1e6) <= pi_S_bound(2, 1e6));
  // The bound needs (ln X)^k >= ln 2 / 2 * pi_S(X); at X = 2 it fails for k >= 2.
  CHECK(static_cast<double>(pi_S(PrimeBasis({2, 3}), 2)) > pi_S_bound(2, 2));
  for (double X = 3; X < 1e7; X *= 1.7) {
    CHECK(static_cast<double>(pi_S(PrimeBasis({2, 3, 5, 7}), X)) <= pi_S_bound(4, X));
  }
}

TEST_CASE("minimal solutions") {
  using V = std::vector<std::vector<std::uint32_t>>;
  CHECK(minimal_solutions(PrimeBasis({2, 3}), 2) == V{{0, 1}, {2, 0}});
  CHECK(minimal_solutions(PrimeBasis({2, 3}), 1) == V{{0, 1}, {1, 0}});
  CounterRng rng(7);
  const std::vector<std::uint64_t> pool{2, 3, 5, 7, 11, 13};
  for (int it = 0; it < 60; ++it) {
    const std::size_t k = 1 + rng.below(3);
    std::vector<std::uint64_t> ps;
    for (std::size_t i = 0; i < pool.size() && ps.size() < k; ++i)
      if (rng.below(2) || pool.size() - i == k - ps.size()) ps.push_back(pool[i]);
    const double K = 1.0 + rng.uniform() * 99.0;
    auto got = minimal_solutions(PrimeBasis(ps), K);
    CHECK(got == oracle::minimal_solutions_exhaustive(ps, K));
    const double cap = std::pow(std::floor(std::log2(K)) + 2, static_cast<double>(k - 1));
    CHECK(static_cast<double>(got.size()) <= cap);
    for (auto& a : got) {
      std::uint32_t s = 0;
      for (auto e : a) s += e;
      CHECK(s <= std::log2(K) + 1 + 1e-12);
    }
  }
}

TEST_CASE("C_s constant") {
  CHECK(C_s_constant(0) == 1.0);
  CHECK(C_s_constant(1) == doctest::Approx(oracle::cs_numeric(1, 1e6)).epsilon(1e-8));
  CHECK(C_s_constant(2) == doctest::Approx(oracle::cs_numeric(2, 1e6)).epsilon(1e-8));
  CHECK(C_s_constant(1) == doctest::Approx(1.0615).epsilon(1e-4));
  CHECK(C_s_constant(2) == doctest::Approx(4.507).epsilon(1e-3));
  CounterRng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double s = rng.uniform() * 4;
    const double x = std::exp(rng.uniform() * std::log(1e9));
    CHECK(C_s_constant(s) >= std::pow(std::log2(x), s) / std::sqrt(x) * (1 - 1e-12));
  }
}

TEST_CASE("BW constant") {
  auto c1 = bw_constant(1);
  REQUIRE(c1.value);
  CHECK(*c1.value == doctest::Approx(18.0 * 2 * 32768 * std::log(2.0)).epsilon(1e-12));
  CHECK(*bw_constant(2).value == doctest::Approx(18.0 * 6 * 8 * std::pow(32.0, 4) * std::log(4.0)).epsilon(1e-12));
  for (int n = 1; n < 10; ++n) CHECK(bw_constant(n + 1).log_value > bw_constant(n).log_value);
  auto big = bw_constant(200);
  CHECK_FALSE(big.value.has_value());
  CHECK(std::isfinite(big.log_value));
}
