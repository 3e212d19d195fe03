#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khintchine/approx.hpp"
#include "khintchine/bigint.hpp"
#include "khintchine/measures.hpp"
#include "khintchine/sequence.hpp"

namespace khintchine::counting {

using arith::BigInt;

// x = X / 2^P and gamma = G / 2^P with 0 <= X, G < 2^P.
class HighPrecisionPoint {
 public:
  HighPrecisionPoint(BigInt x, BigInt gamma, unsigned precision);

  static HighPrecisionPoint from_double(double x, double gamma, unsigned precision);
  // floor(2^P * num / den) for both coordinates.
  static HighPrecisionPoint from_rational(const BigInt& num, const BigInt& den, double gamma, unsigned precision);
  // P independent uniform bits from the counter generator.
  static HighPrecisionPoint uniform(std::uint64_t seed, double gamma, unsigned precision);
  // One draw from the measure, carried to P bits.
  static HighPrecisionPoint draw(const measures::MeasureModel& m, std::uint64_t seed, double gamma, unsigned precision);

  unsigned precision() const noexcept { return P_; }
  const BigInt& x() const noexcept { return x_; }
  const BigInt& gamma() const noexcept { return g_; }
  double x_double() const;
  HighPrecisionPoint with_gamma(const BigInt& gamma) const { return {x_, gamma, P_}; }

  // Bits [lo, lo + width) of X, width <= 128.
  unsigned __int128 x_bits(std::size_t lo, unsigned width) const;
  unsigned __int128 gamma_top128() const;

 private:
  BigInt x_, g_;
  unsigned P_;
  std::vector<std::uint64_t> words_;  // little-endian limbs of X
};

// Smallest admissible precision for a sequence prefix: ceil(log2 q_N) + 64.
unsigned required_precision(const seq::SeqRecord& s, std::size_t N);

// Per-term data shared by every sample: q = 2^a * m.
class CountPlan {
 public:
  CountPlan(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<double>& psi() const noexcept { return psi_; }
  unsigned required_precision() const noexcept { return required_; }

  // Hit flags for n = 1..N (ties count as hits).
  std::vector<std::uint8_t> hits(const HighPrecisionPoint& pt) const;
  std::size_t count(const HighPrecisionPoint& pt) const;

 private:
  struct Term {
    std::uint64_t two_adic;
    std::size_t odd;  // index into odd_
    std::size_t n;
  };
  bool hit(const HighPrecisionPoint& pt, const Term& t) const;

  const seq::SeqRecord* seq_;
  std::vector<Term> terms_;
  std::vector<BigInt> odd_;
  std::vector<unsigned> odd_bits_;
  std::vector<double> psi_;
  unsigned required_ = 0;
};

// #{1 <= n <= N : ||q_n x - gamma|| <= psi(q_n)}.
std::size_t count_R(const HighPrecisionPoint& pt, const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N);

double psi_sum(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N);

// sum_{m<n<=N} (q_m, q_n) min(psi(q_m)/q_m, psi(q_n)/q_n).
double error_E(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N);

// sum_{m<n} (q_m, q_n) / q_n.
double gcd_sum_row(const seq::SeqRecord& s, std::size_t n);
double thm_gcd_bound(int k);

double star_discrepancy(std::vector<double> points);

struct LittlewoodRow {
  std::uint64_t N = 0;
  std::uint64_t count = 0;
  double loglog_N = 0.0;
};

// Counts 2 <= q <= N with q ||q x|| ||q y - gamma|| <= 1 / ln q, where x is
// the rational with the given continued fraction; rows at N = 4, 8, ... and N.
std::vector<LittlewoodRow> littlewood_count(std::span<const std::uint64_t> x_quotients, const HighPrecisionPoint& y,
                                            std::uint64_t N);

enum class Shape { thm1, thm3, thm4 };
std::string to_string(Shape s);
Shape parse_shape(const std::string& name);

// Error shapes with unit constant: thm1 Psi^{2/3} L^{2+eps}, thm3 Psi^{1/2} L^{2+eps},
// thm4 (Psi+E)^{1/2} L'^{2+eps}, with L = ln(Psi + 2), L' = ln(Psi + E + 2).
double shape_value(Shape s, double Psi, double E, double eps);

struct CountReport {
  std::size_t sample = 0;
  std::size_t N = 0;
  std::size_t R = 0;
  double Psi = 0.0;
  std::optional<double> E;
  double residual = 0.0;  // R - 2 Psi
  double shape_bound = 0.0;
};

struct ExperimentConfig {
  Shape shape = Shape::thm1;
  double eps = 0.1;
  double shape_constant = 1.0;
  double gamma = 0.0;
  std::size_t N = 0;
  std::size_t samples = 1;
  std::uint64_t seed = 1;
  unsigned precision = 0;  // 0: required_precision
  bool compute_E = false;  // always on for thm4
  int threads = 1;
};

struct ExperimentSummary {
  double Psi = 0.0;
  std::optional<double> E;
  double expected_R = 0.0;        // sum min(1, 2 psi) for Lebesgue, else NaN
  double median_abs_rel = 0.0;    // median |R / (2 Psi) - 1|
  double fraction_within = 0.0;   // share of samples with |R - 2 Psi| <= shape_bound
  std::size_t min_R = 0, max_R = 0;
  double mean_R = 0.0;
  unsigned precision = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string measure, sequence, psi;
  std::vector<CountReport> reports;
  ExperimentSummary summary;

  std::string to_csv() const;
  std::string summary_json() const;
};

ExperimentResult run_count_experiment(const measures::MeasureModel& m, const seq::SeqRecord& s, const ApproxFn& psi,
                                      const ExperimentConfig& cfg);

struct LemmaCheck {
  bool applicable = false;  // preconditions hold
  double lhs = 0.0;
  double lower = 0.0;  // A1 only
  double rhs = 0.0;
  bool holds = false;
};

struct SumLemmaReport {
  LemmaCheck A1, A2, A3, A4;
};

// s holds s_1..s_b (index k at s[k-1]); 2 <= a < b.
SumLemmaReport sum_lemma_oracles(std::span<const double> s, std::size_t a, std::size_t b, double gamma);

}  // namespace khintchine::counting
