#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "khintchine/bigint.hpp"
#include "khintchine/factored.hpp"
#include "khintchine/sequence.hpp"

namespace khintchine::measures {

using cplx = std::complex<double>;

// Exact rational num/den in lowest terms, den >= 1.
struct Rational {
  std::int64_t num = 0;
  std::uint64_t den = 1;

  // Doubles are dyadic: exact when the denominator fits 2^62, else rounded to it.
  static Rational from_double(double x);
  // "a/b" or a decimal literal.
  static Rational parse(const std::string& text);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Lebesgue {};

struct AtomicFinite {
  std::vector<Rational> points;
  std::vector<double> weights;
};

// Attractor of x -> r x + d_i chosen with probability p_i.
struct SelfSimilar {
  Rational ratio;
  std::vector<Rational> offsets;
  std::vector<double> probs;
};

struct Empirical {
  std::vector<double> samples;
};

class MeasureModel {
 public:
  using Variant = std::variant<Lebesgue, AtomicFinite, SelfSimilar, Empirical>;

  static MeasureModel lebesgue();
  static MeasureModel atomic(std::vector<Rational> points, std::vector<double> weights);
  static MeasureModel self_similar(Rational ratio, std::vector<Rational> offsets, std::vector<double> probs,
                                   std::string name = "self_similar");
  // Middle-third Cantor measure.
  static MeasureModel cantor();
  static MeasureModel empirical(std::vector<double> samples, std::string name = "empirical");

  // "lebesgue", "cantor", "atomic:x1@w1,x2@w2,...", "selfsimilar:r;d1,d2;p1,p2",
  // "empirical:PATH" (newline-delimited decimals in [0,1)).
  static MeasureModel parse(const std::string& spec);

  const Variant& variant() const noexcept { return v_; }
  const std::string& name() const noexcept { return name_; }
  bool is_lebesgue() const noexcept { return std::holds_alternative<Lebesgue>(v_); }
  bool is_self_similar() const noexcept { return std::holds_alternative<SelfSimilar>(v_); }

  // For atoms: a modulus L such that mu_hat at nonzero integers depends only
  // on t mod L. Lebesgue gives 1; empty for self-similar models or when the
  // denominators have no common multiple below 2^63.
  std::optional<std::uint64_t> integer_period() const noexcept { return period_; }

  // Atoms of AtomicFinite / Empirical as exact rationals with their weights.
  const std::vector<Rational>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& atom_weights() const noexcept { return atom_w_; }

 private:
  MeasureModel(Variant v, std::string name);

  Variant v_;
  std::string name_;
  std::optional<std::uint64_t> period_;
  std::vector<Rational> atoms_;
  std::vector<double> atom_w_;
};

std::vector<double> read_empirical(const std::string& path);

// Fourier transform at a real argument.
cplx mu_hat(const MeasureModel& m, double t);
// Fourier transform at an integer argument, with phases reduced exactly.
cplx mu_hat(const MeasureModel& m, const arith::BigInt& t);
// Requires integer_period(); r = t mod L for a nonzero integer t.
cplx mu_hat_residue(const MeasureModel& m, std::uint64_t r);

// mu_hat(s * q) for a fixed q and varying integer s.
class MultipleProbe {
 public:
  MultipleProbe(const MeasureModel& m, const arith::FactoredNat& q);
  cplx operator()(std::int64_t s) const;

 private:
  const MeasureModel* m_;
  std::optional<std::uint64_t> q_mod_;
  arith::BigInt q_big_;
};

struct DecayRow {
  int j = 0;
  double t_lo = 0.0;          // 2^j
  double sup_grid = 0.0;      // sup of |mu_hat(t)| (ln t)^A over the real grid
  double sup_integer = 0.0;   // same over the integer points
  double value = 0.0;         // max of the two
  double running_max = 0.0;
};

struct DecayProfile {
  double A = 1.0;
  std::vector<DecayRow> rows;
  bool consistent = false;  // last-quarter running max <= 2 * first-quarter
};

inline constexpr int kGridPerBlock = 4096;

// Rows j = j_min..j_max over |t| in [2^j, 2^{j+1}).
DecayProfile decay_profile(const MeasureModel& m, double A, int j_max, int j_min = 1, int threads = 1);

// n i.i.d. draws in [0,1); SelfSimilar uses an IFS descent of depth ceil(P / log2(1/r)).
std::vector<double> sample(const MeasureModel& m, std::uint64_t seed, std::size_t n, int precision_bits = 53);

enum class MassMethod { automatic, exact, subdivision, monte_carlo };
MassMethod parse_mass_method(const std::string& name);

struct MassEstimate {
  double value = 0.0;
  double lo = 0.0;  // rigorous bracket or 99% confidence interval
  double hi = 0.0;
  MassMethod method = MassMethod::exact;
  std::size_t work = 0;  // cylinders visited or samples drawn
};

struct MassOptions {
  int depth_cap = 40;
  std::size_t node_budget = 4'000'000;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 1;
};

MassEstimate mu_E_mass(const MeasureModel& m, std::uint64_t q, double gamma, double psi_q,
                       MassMethod method = MassMethod::automatic, const MassOptions& opt = {});

struct Lem2Bounds {
  double bound1 = 0.0;
  double bound2 = 0.0;
  double max_abs = 0.0;          // max_{s <= s_cap} |mu_hat(sq)|, a lower bound on the sup
  double series_partial = 0.0;   // sum_{s <= s_cap} |mu_hat(sq)| / s
  double series_tail = 0.0;      // geometric tail estimate, infinity when the block maxima do not decrease
  bool sup_truncated = true;
};

Lem2Bounds lem2_bounds(const MeasureModel& m, const arith::FactoredNat& q, double psi_q, std::int64_t s_cap = 1000);

struct SeriesRow {
  std::size_t n = 0;
  double term = 0.0;
  double partial = 0.0;
};

struct ConvConditions {
  std::vector<SeriesRow> max_series;       // sum_n max_{k != 0} |mu_hat(k q_n)|
  std::vector<SeriesRow> weighted_series;  // sum_n sum_{k != 0} |mu_hat(k q_n)| / |k|
  double tol = 1e-6;
  bool max_converges = false;
  bool weighted_converges = false;
};

// Convergence verdict: every increment over the last quarter of rows is below tol.
ConvConditions conv_conditions(const MeasureModel& m, const seq::SeqRecord& s, std::int64_t s_cap = 1000,
                               std::size_t N = 0, double tol = 1e-6);

struct DelRow {
  std::size_t N = 0;
  double inner = 0.0;    // sum_{m,n <= N} mu_hat(h (q_m - q_n))
  double partial = 0.0;  // sum_{M <= N} inner(M) / M^3
  double increment = 0.0;
};

std::vector<DelRow> del_criterion(const MeasureModel& m, const seq::SeqRecord& s, std::int64_t h, std::size_t N_max);

// True when every increment past N_from is below tol.
bool cauchy_beyond(const std::vector<DelRow>& rows, std::size_t N_from, double tol);

// Decreasing f on x >= 3, given through v = ln ln x: f(x) = f_loglog(ln ln x).
struct DecreasingFn {
  std::string name;
  std::function<double(double)> f_loglog;

  static DecreasingFn loglog_power(double eps);  // (ln ln x)^{-(1+eps)}
  static DecreasingFn inv_log();                 // 1 / ln x
  static DecreasingFn constant();                // 1
  // "loglog:EPS", "invlog", "const".
  static DecreasingFn parse(const std::string& spec);
};

struct ReductionRow {
  double loglog_N = 0.0;  // v = ln ln N
  double a_lo = 0.0, a_hi = 0.0;  // sum_{n <= N} f(n) / (n ln n)
  double b_lo = 0.0, b_hi = 0.0;  // sum_{n <= ln N / ln K} F(n) / n,  F(n) = f(K^n - 1)
};

struct ReductionReport {
  std::vector<ReductionRow> rows;
  double tol = 0.05;
  double a_last_block = 0.0;  // growth of the sums while v runs over [V/2, V]
  double b_last_block = 0.0;
  bool a_cauchy = false;
  bool b_cauchy = false;
  bool equivalent = false;
};

// Both sums up to the common N with ln ln N = loglog_max. Indices up to direct_max
// are summed term by term; beyond, the integral test brackets the remainder.
ReductionReport del_lacunary_reduction(const DecreasingFn& f, double K, double loglog_max = 1e4,
                                       std::uint64_t direct_max = 1'000'000, double tol = 0.05);

}  // namespace khintchine::measures
