#include <cmath>
#include <numeric>

#include "doctest.h"
#include "khintchine/counting.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/rng.hpp"
#include "oracles/oracles.hpp"

using namespace khintchine;
using namespace khintchine::counting;
using arith::BigInt;

namespace {

std::vector<BigInt> big_terms(const seq::SeqRecord& s, std::size_t N) {
  std::vector<BigInt> out;
  for (std::size_t n = 1; n <= N; ++n) out.push_back(arith::to_bigint(s.q(n)));
  return out;
}

std::vector<double> psi_values(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N) {
  std::vector<double> out;
  for (std::size_t n = 1; n <= N; ++n) out.push_back(psi.psi(n, s.q(n).log()));
  return out;
}

}  // namespace

TEST_CASE("high precision points") {
  const auto p = HighPrecisionPoint::from_double(0.75, 0.5, 10);
  CHECK(p.x() == 768);
  CHECK(p.gamma() == 512);
  CHECK(p.x_double() == 0.75);
  CHECK(p.x_bits(8, 2) == 3);
  const auto r = HighPrecisionPoint::from_rational(1, 3, 0.0, 200);
  CHECK(r.x() == ((BigInt(1) << 200) / 3));
  CHECK(r.x_bits(0, 2) == 1);
  CHECK(r.x_bits(198, 2) == 1);
  CHECK(r.x_bits(130, 128) == static_cast<unsigned __int128>(((BigInt(1) << 200) / 3) >> 130));
  CHECK(std::abs(r.x_double() - 1.0 / 3) < 1e-16);
  CHECK_THROWS_AS(HighPrecisionPoint(BigInt(1) << 10, 0, 10), DomainError);
  CHECK_THROWS_AS(HighPrecisionPoint::from_double(1.0, 0.0, 64), DomainError);

  const auto u1 = HighPrecisionPoint::uniform(5, 0.0, 300), u2 = HighPrecisionPoint::uniform(5, 0.0, 300);
  CHECK(u1.x() == u2.x());
  CHECK(u1.x() < (BigInt(1) << 300));
  CHECK(u1.x() > (BigInt(1) << 280));

  const auto c = HighPrecisionPoint::draw(measures::MeasureModel::cantor(), 3, 0.0, 256);
  CHECK(oracle::in_cantor_cover(c.x_double(), 30, 1e-12));
  const auto a = HighPrecisionPoint::draw(measures::MeasureModel::atomic({{1, 3}}, {1.0}), 3, 0.0, 256);
  CHECK(a.x() == (BigInt(1) << 256) / 3);
}

TEST_CASE("required precision") {
  CHECK(required_precision(seq::gen_geometric(1, 2, 11), 11) == 74);
  CHECK(required_precision(seq::gen_geometric(1, 3, 3), 3) == 68);
  CHECK_THROWS_AS(required_precision(seq::gen_geometric(1, 3, 3), 4), DomainError);
}

TEST_CASE("counting against a wide floating-point oracle") {
  const std::vector<std::pair<seq::SeqRecord, ApproxFn>> cases = {
      {seq::gen_smooth(arith::make_basis({2, 3}), {0, 200 * std::log(2.0)}), ApproxFn::inverse_log(1.0)},
      {seq::gen_smooth(arith::make_basis({3, 5, 7}), {0, 150 * std::log(2.0)}), ApproxFn::constant(0.05)},
      {seq::gen_geometric(1, 2, 300), ApproxFn::constant(0.2)},
      {seq::gen_footnote(62), ApproxFn::index_power(0.5)},
  };
  for (const auto& [s, psi] : cases) {
    const std::size_t N = s.size();
    const CountPlan plan(s, psi, N);
    const auto q = big_terms(s, N);
    const auto ps = psi_values(s, psi, N);
    for (unsigned extra : {0u, 700u}) {
      const unsigned P = plan.required_precision() + extra;
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto pt = HighPrecisionPoint::uniform(seed, 0.0, P).with_gamma(
            HighPrecisionPoint::uniform(seed + 100, 0.0, P).x());
        CHECK(plan.count(pt) == oracle::count_float(pt.x(), pt.gamma(), P, q, ps));
      }
    }
    CHECK_THROWS_AS(plan.count(HighPrecisionPoint::uniform(1, 0.0, plan.required_precision() - 1)),
                    PreconditionError);
  }
}

TEST_CASE("boundary ties are decided exactly") {
  const auto s = seq::gen_smooth(arith::make_basis({2, 3}), {500});
  const unsigned P = required_precision(s, s.size());
  const auto x0 = HighPrecisionPoint::from_double(0.0, 0.25, P);
  CHECK(count_R(x0, s, ApproxFn::constant(0.25), s.size()) == s.size());
  CHECK(count_R(x0, s, ApproxFn::constant(0.25 * (1 - 1e-12)), s.size()) == 0);
  CHECK(count_R(HighPrecisionPoint::from_double(0.0, 0.0, P), s, ApproxFn::constant(1e-300), s.size()) ==
        s.size());
  // x = 1/3 with gamma = 0: ||q/3|| is 0 or 1/3
  const auto third = HighPrecisionPoint::from_rational(1, 3, 0.0, P + 200);
  std::size_t multiples = 0;
  for (std::size_t n = 1; n <= s.size(); ++n) multiples += s.q(n).to_u64() % 3 == 0;
  CHECK(count_R(third, s, ApproxFn::constant(0.3), s.size()) == multiples);
  CHECK(count_R(third, s, ApproxFn::constant(0.34), s.size()) == s.size());
}

TEST_CASE("golden convergents at psi one half") {
  std::vector<std::uint64_t> ones(80, 1);
  const auto s = seq::convergent_denominators(ones);
  const auto pt = HighPrecisionPoint::uniform(9, 0.3, required_precision(s, s.size()));
  CHECK(count_R(pt, s, ApproxFn::constant(0.5), s.size()) == s.size());
}

TEST_CASE("psi sums and the error term") {
  const auto s = seq::gen_geometric(1, 3, 20);
  CHECK(psi_sum(s, ApproxFn::constant(0.1), 20) == doctest::Approx(2.0));
  CHECK(psi_sum(s, ApproxFn::index_power(1.0), 4) == doctest::Approx(1 + 0.5 + 1.0 / 3 + 0.25));

  for (std::size_t N : {2u, 5u, 30u, 60u}) {
    const auto p2 = seq::gen_geometric(2, 2, N);
    CHECK(error_E(p2, ApproxFn::constant(1.0), N) ==
          doctest::Approx(static_cast<double>(N) - 2 + std::ldexp(1.0, 1 - static_cast<int>(N))).epsilon(1e-13));
  }
  const auto sm = seq::gen_smooth(arith::make_basis({2, 3, 5}), {400});
  for (const auto& psi : {ApproxFn::inverse_log(1.0), ApproxFn::constant(0.01), ApproxFn::index_power(0.7)}) {
    const auto E = error_E(sm, psi, 400);
    const auto naive = oracle::error_naive(sm.to_u64(400), psi_values(sm, psi, 400));
    CHECK(E == doctest::Approx(static_cast<double>(naive)).epsilon(1e-11));
  }
}

TEST_CASE("gcd rows and the smooth bound") {
  const auto p2 = seq::gen_smooth(arith::make_basis({2}), {60});
  for (std::size_t n : {2u, 10u, 60u})
    CHECK(gcd_sum_row(p2, n) == doctest::Approx(1 - std::ldexp(1.0, 1 - static_cast<int>(n))).epsilon(1e-14));
  const auto s23 = seq::gen_smooth(arith::make_basis({2, 3}), {3000});
  CHECK(gcd_sum_row(s23, 2) == doctest::Approx(0.5));

  CHECK(thm_gcd_bound(1) == doctest::Approx(6.0));
  CHECK(thm_gcd_bound(2) == doctest::Approx(41.97).epsilon(1e-3));
  CHECK_THROWS_AS(thm_gcd_bound(0), DomainError);

  const auto q = s23.to_u64(1200);
  for (std::size_t n = 2; n <= 1200; n += 97) {
    long double naive = 0;
    for (std::size_t m = 0; m + 1 < n; ++m)
      naive += static_cast<long double>(std::gcd(q[m], q[n - 1])) / static_cast<long double>(q[n - 1]);
    const double row = gcd_sum_row(s23, n);
    CHECK(row == doctest::Approx(static_cast<double>(naive)).epsilon(1e-12));
    CHECK(row <= thm_gcd_bound(2));
  }
  const auto s235 = seq::gen_smooth(arith::make_basis({2, 3, 5}), {3000});
  for (std::size_t n = 2; n <= 3000; n += 211) CHECK(gcd_sum_row(s235, n) <= thm_gcd_bound(3));
}

TEST_CASE("star discrepancy") {
  CHECK(star_discrepancy({0.5}) == doctest::Approx(0.5));
  CHECK(star_discrepancy({0.0}) == doctest::Approx(1.0));
  CHECK(star_discrepancy({0.125, 0.375, 0.625, 0.875}) == doctest::Approx(0.125));
  CHECK_THROWS_AS(star_discrepancy({}), DomainError);
  CHECK_THROWS_AS(star_discrepancy({1.0}), DomainError);
  CounterRng rng(4);
  for (std::size_t n : {1u, 7u, 100u, 1000u}) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(rng.uniform());
    CHECK(star_discrepancy(xs) == doctest::Approx(oracle::star_naive(xs)).epsilon(1e-14));
  }
}

TEST_CASE("littlewood counts") {
  std::vector<std::uint64_t> golden(120, 1);
  golden[0] = 0;
  const unsigned P = 160;
  const BigInt Y = boost::multiprecision::sqrt(BigInt(2) << (2 * P)) - (BigInt(1) << P);  // sqrt 2 - 1
  const auto y = HighPrecisionPoint(Y, 0, P);
  const auto rows = littlewood_count(golden, y, 3000);
  CHECK(rows.front().N == 4);
  CHECK(rows.back().N == 3000);
  CHECK(rows[rows.size() - 2].N == 2048);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].count >= rows[i - 1].count);
  CHECK(rows[3].count == oracle::littlewood_golden_naive(Y, 0, P, rows[3].N));
  CHECK(rows.back().count == oracle::littlewood_golden_naive(Y, 0, P, rows.back().N));
  CHECK(rows.back().loglog_N == doctest::Approx(std::log(std::log(3000.0))));

  const auto shifted = HighPrecisionPoint(Y, BigInt(1) << (P - 2), P);
  CHECK(littlewood_count(golden, shifted, 1000).back().count ==
        oracle::littlewood_golden_naive(Y, BigInt(1) << (P - 2), P, 1000));
  CHECK_THROWS_AS(littlewood_count(golden, HighPrecisionPoint(0, 0, 70), 5000), PreconditionError);
  CHECK_THROWS_AS(littlewood_count(golden, y, 2), DomainError);
}

TEST_CASE("shapes") {
  CHECK(parse_shape("thm3") == Shape::thm3);
  CHECK(to_string(Shape::thm4) == "thm4");
  CHECK_THROWS_AS(parse_shape("thm2"), ConfigError);
  CHECK(shape_value(Shape::thm1, 8, 0, 0) == doctest::Approx(4 * std::pow(std::log(10.0), 2)));
  CHECK(shape_value(Shape::thm3, 16, 0, 0.5) == doctest::Approx(4 * std::pow(std::log(18.0), 2.5)));
  CHECK(shape_value(Shape::thm4, 7, 2, 0) == doctest::Approx(3 * std::pow(std::log(11.0), 2)));
}

TEST_CASE("count experiments") {
  const auto s = seq::gen_smooth(arith::make_basis({2, 3}), {2000});
  const auto psi = ApproxFn::inverse_log(1.0);
  ExperimentConfig cfg;
  cfg.shape = Shape::thm4;
  cfg.samples = 64;
  cfg.seed = 11;
  const auto r1 = run_count_experiment(measures::MeasureModel::lebesgue(), s, psi, cfg);
  cfg.threads = 3;
  const auto r3 = run_count_experiment(measures::MeasureModel::lebesgue(), s, psi, cfg);
  CHECK(r1.to_csv() == r3.to_csv());
  CHECK(r1.summary_json() == r3.summary_json());
  CHECK(r1.summary.E.has_value());
  CHECK(r1.summary.Psi == doctest::Approx(psi_sum(s, psi, 2000)));
  // R is a sum of N Bernoulli(2 psi_n) terms under Lebesgue
  CHECK(std::abs(r1.summary.mean_R - r1.summary.expected_R) < 4 * std::sqrt(r1.summary.expected_R / 8.0) + 5);
  CHECK(r1.to_csv().rfind("sample,N,R,Psi,E,residual,shape_bound\n", 0) == 0);
  for (const auto& rep : r1.reports) {
    const auto pt = HighPrecisionPoint::uniform(derive_seed(11, rep.sample), 0.0, r1.summary.precision);
    CHECK(rep.R == count_R(pt, s, psi, 2000));
  }

  cfg.shape = Shape::thm1;
  cfg.samples = 5;
  const auto c = run_count_experiment(measures::MeasureModel::cantor(), s, psi, cfg);
  CHECK_FALSE(c.summary.E.has_value());
  CHECK(c.to_csv().find(",,") != std::string::npos);
  cfg.precision = 10;
  CHECK_THROWS_AS(run_count_experiment(measures::MeasureModel::cantor(), s, psi, cfg), PreconditionError);
}

TEST_CASE("sum lemmas") {
  CounterRng rng(21);
  std::size_t applicable[4] = {0, 0, 0, 0};
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t b = 3 + rng.below(300);
    std::vector<double> s(b);
    const bool sparse = trial % 3 == 0;
    for (auto& v : s) v = sparse ? (rng.uniform() < 0.1 ? rng.uniform() : 0.0) : rng.uniform();
    const std::size_t a = 2 + rng.below(b - 2);
    for (double gamma : {0.05, 0.5, 1.0, 4.0}) {
      const auto rep = sum_lemma_oracles(s, a, b, gamma);
      const LemmaCheck* checks[] = {&rep.A1, &rep.A2, &rep.A3, &rep.A4};
      for (int i = 0; i < 4; ++i)
        if (checks[i]->applicable) {
          ++applicable[i];
          CHECK(checks[i]->holds);
        }
    }
  }
  for (auto n : applicable) CHECK(n > 100);

  const std::vector<double> ones(10, 1.0);
  const auto r = sum_lemma_oracles(ones, 2, 10, 1.0);
  CHECK(r.A3.lhs == doctest::Approx(0.5497677311665408));
  CHECK(r.A3.rhs == doctest::Approx(0.9));
  CHECK(r.A4.lhs == doctest::Approx(1.5497677311665408));
  CHECK_THROWS_AS(sum_lemma_oracles(ones, 1, 10, 1.0), DomainError);
  CHECK_THROWS_AS(sum_lemma_oracles(ones, 2, 10, 0.0), DomainError);
}

TEST_CASE("counting properties") {
  const auto s = seq::gen_smooth(arith::make_basis({2, 3}), {1000});
  const auto psi = ApproxFn::inverse_log(1.0);
  CHECK(error_E(s, psi, 1) == 0.0);
  CHECK(psi_sum(s, psi, 0) == 0.0);
  CHECK(error_E(s, psi, 1000) <= thm_gcd_bound(2) * psi_sum(s, psi, 1000));

  const unsigned P = required_precision(s, 1000);
  CHECK(count_R(HighPrecisionPoint(0, 0, P), s, ApproxFn::index_power(3.0), 1000) == 1000);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pt = HighPrecisionPoint::uniform(seed, 0.0, P);
    const auto h_small = CountPlan(s, ApproxFn::constant(0.05), 1000).hits(pt);
    const auto h_large = CountPlan(s, ApproxFn::constant(0.1), 1000).hits(pt);
    std::size_t running = 0, prev = 0;
    for (std::size_t n = 0; n < 1000; ++n) {
      CHECK(h_small[n] <= h_large[n]);
      running += h_small[n];
      if (n % 100 == 99) {
        CHECK(count_R(pt, s, ApproxFn::constant(0.05), n + 1) == running);
        CHECK(running >= prev);
        prev = running;
      }
    }
  }
}

TEST_CASE("equispaced discrepancy") {
  for (int n : {1, 3, 10, 64}) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(static_cast<double>(i) / n);
    CHECK(star_discrepancy(xs) == doctest::Approx(1.0 / n));
  }
}

TEST_CASE("littlewood exact hits") {
  std::vector<std::uint64_t> golden(60, 1);
  golden[0] = 0;
  const unsigned P = 100;
  CounterRng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto y = HighPrecisionPoint::uniform(rng.next(), 0.0, P);
    const auto rows = littlewood_count(golden, y, 64);
    CHECK(rows[1].count >= 1);  // N = 8
    // gamma = 37 y mod 1 puts q = 37 exactly on target
    const BigInt g = (y.x() * 37) % (BigInt(1) << P);
    const auto base = littlewood_count(golden, y.with_gamma(g), 36).back().count;
    CHECK(littlewood_count(golden, y.with_gamma(g), 37).back().count == base + 1);
  }
}

TEST_CASE("convergence case stays bounded") {
  const auto s = seq::gen_geometric(2, 2, 3000);
  ExperimentConfig cfg;
  cfg.samples = 20;
  const auto r = run_count_experiment(measures::MeasureModel::lebesgue(), s, ApproxFn::index_power(2.0), cfg);
  CHECK(r.summary.max_R <= 10);
  CHECK(r.summary.min_R >= 1);
}
