#include "khintchine/counting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include "json.hpp"
#include <numeric>
#include <sstream>

#include "khintchine/constants.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/parallel.hpp"
#include "khintchine/rng.hpp"

namespace khintchine::counting {

using u128 = unsigned __int128;

namespace {

constexpr unsigned kMaxPrecision = 1u << 28;

struct Kahan {
  double sum = 0, c = 0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

BigInt pow2(unsigned e) { return BigInt(1) << e; }

BigInt low_bits(const BigInt& v, unsigned bits) { return v & (pow2(bits) - 1); }

std::size_t bit_length(const BigInt& v) { return v == 0 ? 0 : boost::multiprecision::msb(v) + 1; }

// ceil(log2 q)
unsigned ceil_log2(const BigInt& q) {
  const std::size_t len = bit_length(q);
  const bool power = q == pow2(static_cast<unsigned>(len - 1));
  return static_cast<unsigned>(power ? len - 1 : len);
}

BigInt dyadic_fixed(double v, unsigned P) {
  if (!(v >= 0 && v < 1)) throw DomainError("coordinate must lie in [0,1)");
  const auto r = measures::Rational::from_double(v);
  return (BigInt(r.num) << P) / BigInt(r.den);
}

double fixed_to_double(const BigInt& v, unsigned P) {
  if (v == 0) return 0;
  const std::size_t len = bit_length(v);
  if (len <= 64) return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(v)), -static_cast<int>(P));
  const auto top = static_cast<std::uint64_t>(v >> static_cast<unsigned>(len - 64));
  return std::ldexp(static_cast<double>(top), static_cast<int>(len) - 64 - static_cast<int>(P));
}

std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// d / 2^P <= psi, exactly.
bool below_exact(const BigInt& d, unsigned P, double psi) {
  if (psi >= 0.5) return true;
  if (psi <= 0) return d == 0;
  int e = 0;
  const double f = std::frexp(psi, &e);
  const BigInt M = static_cast<std::uint64_t>(std::ldexp(f, 53));
  const long shift = static_cast<long>(e) - 53 + static_cast<long>(P);
  if (shift >= 0) return d <= (M << static_cast<unsigned>(shift));
  return (d << static_cast<unsigned>(-shift)) <= M;
}

}  // namespace

// ---------------------------------------------------------------- points

HighPrecisionPoint::HighPrecisionPoint(BigInt x, BigInt gamma, unsigned precision)
    : x_(std::move(x)), g_(std::move(gamma)), P_(precision) {
  if (P_ < 1 || P_ > kMaxPrecision) throw DomainError("precision out of range");
  const BigInt one = pow2(P_);
  if (x_ < 0 || x_ >= one || g_ < 0 || g_ >= one) throw DomainError("fixed-point coordinate outside [0,1)");
  words_.assign((P_ + 63) / 64, 0);
  if (x_ != 0) {
    std::vector<std::uint64_t> tmp;
    export_bits(x_, std::back_inserter(tmp), 64, false);
    std::copy(tmp.begin(), tmp.end(), words_.begin());
  }
}

HighPrecisionPoint HighPrecisionPoint::from_double(double x, double gamma, unsigned precision) {
  return {dyadic_fixed(x, precision), dyadic_fixed(gamma, precision), precision};
}

HighPrecisionPoint HighPrecisionPoint::from_rational(const BigInt& num, const BigInt& den, double gamma,
                                                    unsigned precision) {
  if (den <= 0 || num < 0 || num >= den) throw DomainError("rational coordinate outside [0,1)");
  return {(num << precision) / den, dyadic_fixed(gamma, precision), precision};
}

HighPrecisionPoint HighPrecisionPoint::uniform(std::uint64_t seed, double gamma, unsigned precision) {
  CounterRng rng(seed);
  std::vector<std::uint64_t> w((precision + 63) / 64);
  for (auto& v : w) v = rng.next();
  if (precision % 64) w.back() &= (std::uint64_t{1} << (precision % 64)) - 1;
  BigInt x;
  import_bits(x, w.rbegin(), w.rend(), 64, true);
  return {x, dyadic_fixed(gamma, precision), precision};
}

HighPrecisionPoint HighPrecisionPoint::draw(const measures::MeasureModel& m, std::uint64_t seed, double gamma,
                                            unsigned precision) {
  using namespace measures;
  if (m.is_lebesgue()) return uniform(seed, gamma, precision);
  CounterRng rng(seed);
  auto pick = [&rng](const std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double u = rng.uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (u < (acc += w[i])) return i;
    return w.size() - 1;
  };
  if (const auto* s = std::get_if<SelfSimilar>(&m.variant())) {
    const double r = s->ratio.value();
    const auto depth = static_cast<std::size_t>(std::ceil(precision / std::log2(1 / r))) + 2;
    BigInt E = 1;
    for (const auto& d : s->offsets) E = boost::multiprecision::lcm(E, BigInt(d.den));
    const BigInt a = s->ratio.num, b = s->ratio.den;
    // x = T / (E b^{depth-1}),  T = sum_j c_j a^j b^{depth-1-j}
    BigInt T = 0, aj = 1, bpow = 1;
    for (std::size_t j = 0; j < depth; ++j) {
      const auto& d = s->offsets[pick(s->probs)];
      const BigInt c = BigInt(d.num) * (E / d.den);
      T = (j == 0) ? c : T * b + c * aj;
      aj *= a;
      if (j) bpow *= b;
    }
    const BigInt den = E * bpow;
    BigInt num = T;
    if (num >= den) num = den - 1;
    return from_rational(num, den, gamma, precision);
  }
  const auto& atoms = m.atoms();
  const auto& x = atoms[pick(m.atom_weights())];
  return from_rational(BigInt(x.num), BigInt(x.den), gamma, precision);
}

double HighPrecisionPoint::x_double() const { return fixed_to_double(x_, P_); }

u128 HighPrecisionPoint::x_bits(std::size_t lo, unsigned width) const {
  u128 out = 0;
  for (unsigned i = 0; i < width;) {
    const std::size_t bit = lo + i;
    const std::size_t w = bit / 64;
    if (w >= words_.size()) break;
    const unsigned off = static_cast<unsigned>(bit % 64);
    const unsigned take = std::min(64 - off, width - i);
    std::uint64_t chunk = words_[w] >> off;
    if (take < 64) chunk &= (std::uint64_t{1} << take) - 1;
    out |= static_cast<u128>(chunk) << i;
    i += take;
  }
  return out;
}

u128 HighPrecisionPoint::gamma_top128() const {
  if (P_ >= 128) return static_cast<u128>(g_ >> (P_ - 128));
  return static_cast<u128>(g_) << (128 - P_);
}

unsigned required_precision(const seq::SeqRecord& s, std::size_t N) {
  if (N == 0 || N > s.size()) throw DomainError("N must lie in [1, len]");
  return ceil_log2(arith::to_bigint(s.q(N))) + 64;
}

// ---------------------------------------------------------------- counting

CountPlan::CountPlan(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N) : seq_(&s) {
  if (N == 0 || N > s.size()) throw DomainError("N must lie in [1, len]");
  std::map<std::vector<std::uint64_t>, std::size_t> index;
  terms_.reserve(N);
  for (std::size_t n = 1; n <= N; ++n) {
    const auto& q = s.q(n);
    std::vector<std::uint64_t> key;
    BigInt odd = 1;
    for (const auto& pp : q.prime_powers()) {
      if (pp.prime == 2) continue;
      key.push_back(pp.prime);
      key.push_back(pp.exponent);
    }
    auto [it, fresh] = index.emplace(key, odd_.size());
    if (fresh) {
      for (std::size_t i = 0; i < key.size(); i += 2) odd *= boost::multiprecision::pow(BigInt(key[i]), static_cast<unsigned>(key[i + 1]));
      odd_bits_.push_back(static_cast<unsigned>(bit_length(odd)));
      odd_.push_back(std::move(odd));
    }
    terms_.push_back({q.two_adic(), it->second, n});
  }
  const auto logs = s.logs();
  const auto lp = psi.log_table(std::span<const double>(logs.data(), N));
  psi_.resize(N);
  for (std::size_t i = 0; i < N; ++i) psi_[i] = std::exp(lp[i]);
  required_ = counting::required_precision(s, N);
}

bool CountPlan::hit(const HighPrecisionPoint& pt, const Term& t) const {
  const double psi = psi_[t.n - 1];
  if (psi >= 0.5) return true;
  const unsigned P = pt.precision();
  u128 frac = 0;
  if (t.two_adic < P) {
    const unsigned Pp = P - static_cast<unsigned>(t.two_adic);
    const BigInt& m = odd_[t.odd];
    if (m == 1) {
      frac = Pp >= 128 ? pt.x_bits(Pp - 128, 128) : pt.x_bits(0, Pp) << (128 - Pp);
    } else {
      const unsigned W = odd_bits_[t.odd] + 128;
      if (Pp > W) {
        const BigInt Zt = low_bits(pt.x() >> (Pp - W), W);
        frac = static_cast<u128>(low_bits(m * Zt, W) >> (W - 128));
      } else {
        const BigInt R = low_bits(m * low_bits(pt.x(), Pp), Pp);
        frac = Pp >= 128 ? static_cast<u128>(R >> (Pp - 128)) : static_cast<u128>(R) << (128 - Pp);
      }
    }
  }
  const u128 F = frac - pt.gamma_top128();
  const u128 d = std::min(F, static_cast<u128>(0) - F);
  const u128 limit = static_cast<u128>(std::ldexp(psi, 128));
  constexpr u128 margin = 16;
  if (d + margin < limit) return true;
  if (d > limit + margin) return false;
  // within the truncation error of the boundary: decide at full precision
  const BigInt one = pow2(P);
  BigInt Fx = (arith::to_bigint(seq_->q(t.n)) * pt.x() - pt.gamma()) % one;
  if (Fx < 0) Fx += one;
  return below_exact(std::min<BigInt>(Fx, one - Fx), P, psi);
}

std::vector<std::uint8_t> CountPlan::hits(const HighPrecisionPoint& pt) const {
  if (pt.precision() < required_)
    throw PreconditionError("precision " + std::to_string(pt.precision()) + " bits is below the required " +
                            std::to_string(required_) + " bits (ceil(log2 q_N) + 64)");
  std::vector<std::uint8_t> out(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) out[i] = hit(pt, terms_[i]);
  return out;
}

std::size_t CountPlan::count(const HighPrecisionPoint& pt) const {
  const auto h = hits(pt);
  return static_cast<std::size_t>(std::count(h.begin(), h.end(), 1));
}

std::size_t count_R(const HighPrecisionPoint& pt, const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N) {
  return CountPlan(s, psi, N).count(pt);
}

double psi_sum(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N) {
  if (N > s.size()) throw DomainError("psi_sum: N exceeds the sequence length");
  Kahan k;
  for (std::size_t n = 1; n <= N; ++n) k.add(std::exp(psi.log_psi(n, s.q(n).log())));
  return k.sum;
}

double error_E(const seq::SeqRecord& s, const ApproxFn& psi, std::size_t N) {
  if (N > s.size()) throw DomainError("error_E: N exceeds the sequence length");
  std::vector<double> lq(N), lr(N);
  for (std::size_t n = 1; n <= N; ++n) {
    lq[n - 1] = s.q(n).log();
    lr[n - 1] = psi.log_psi(n, lq[n - 1]) - lq[n - 1];  // ln(psi/q)
  }
  Kahan total;
  for (std::size_t n = 2; n <= N; ++n) {
    // row bound: sum_m (q_m,q_n)/q_n * psi_n <= (n-1) psi_n
    if (std::exp(lr[n - 1] + lq[n - 1]) * static_cast<double>(n - 1) < 1e-18) continue;
    Kahan row;
    for (std::size_t m = 1; m < n; ++m) {
      const double lg = arith::gcd_ratio_log(s.q(m), s.q(n)) + lq[n - 1];
      row.add(std::exp(lg + std::min(lr[m - 1], lr[n - 1])));
    }
    total.add(row.sum);
  }
  return total.sum;
}

double gcd_sum_row(const seq::SeqRecord& s, std::size_t n) {
  if (n < 2 || n > s.size()) throw DomainError("gcd_sum_row: need 2 <= n <= len");
  Kahan k;
  for (std::size_t m = 1; m < n; ++m) k.add(std::exp(arith::gcd_ratio_log(s.q(m), s.q(n))));
  return k.sum;
}

double thm_gcd_bound(int k) {
  if (k < 1) throw DomainError("thm_gcd_bound: k must be at least 1");
  return std::ldexp(1.0, 2 * k - 1) * (arith::C_s_constant(k - 1) * std::ldexp(1.0, k) + 1);
}

double star_discrepancy(std::vector<double> points) {
  if (points.empty()) throw DomainError("star_discrepancy: empty point set");
  for (double x : points)
    if (!(x >= 0 && x < 1)) throw DomainError("star_discrepancy: point outside [0,1)");
  std::sort(points.begin(), points.end());
  const double n = static_cast<double>(points.size());
  double d = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i];
    d = std::max({d, (static_cast<double>(i) + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<LittlewoodRow> littlewood_count(std::span<const std::uint64_t> x_quotients, const HighPrecisionPoint& y,
                                            std::uint64_t N) {
  if (N < 3) throw DomainError("littlewood_count: N must be at least 3");
  if (x_quotients.empty()) throw DomainError("littlewood_count: empty continued fraction");
  const unsigned need = static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(N)))) + 64;
  if (y.precision() < need)
    throw PreconditionError("littlewood_count: precision " + std::to_string(y.precision()) + " bits is below the required " +
                            std::to_string(need) + " bits");
  // x = p/q from the continued fraction
  BigInt p0 = 1, q0 = 0, p1 = x_quotients[0], q1 = 1;
  for (std::size_t i = 1; i < x_quotients.size(); ++i) {
    if (x_quotients[i] == 0) throw DomainError("littlewood_count: partial quotients must be positive");
    const BigInt p2 = p1 * x_quotients[i] + p0, q2 = q1 * x_quotients[i] + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  const BigInt Q = q1, step = p1 % Q;
  const unsigned P = y.precision();
  const BigInt one = pow2(P);
  auto ratio = [](const BigInt& num, const BigInt& den) {
    if (num == 0) return 0.0;
    const long shift = static_cast<long>(bit_length(den)) - 60;
    if (shift <= 0) return static_cast<double>(num) / static_cast<double>(den);
    return static_cast<double>(num >> static_cast<unsigned>(shift)) / static_cast<double>(den >> static_cast<unsigned>(shift));
  };
  std::vector<LittlewoodRow> rows;
  BigInt r = 0, Y = 0;
  std::uint64_t count = 0, next_row = 4;
  for (std::uint64_t q = 1; q <= N; ++q) {
    r += step;
    if (r >= Q) r -= Q;
    Y += y.x();
    if (Y >= one) Y -= one;
    if (q >= 2) {
      const double dx = ratio(std::min<BigInt>(r, Q - r), Q);
      BigInt F = Y - y.gamma();
      if (F < 0) F += one;
      const double dy = fixed_to_double(std::min<BigInt>(F, one - F), P);
      if (static_cast<double>(q) * dx * dy <= 1 / std::log(static_cast<double>(q))) ++count;
    }
    if (q == next_row || q == N) {
      rows.push_back({q, count, std::log(std::log(static_cast<double>(q)))});
      if (q == next_row) next_row *= 2;
    }
  }
  return rows;
}

// ---------------------------------------------------------------- experiments

std::string to_string(Shape s) {
  switch (s) {
    case Shape::thm1: return "thm1";
    case Shape::thm3: return "thm3";
    case Shape::thm4: return "thm4";
  }
  return "?";
}

Shape parse_shape(const std::string& name) {
  if (name == "thm1") return Shape::thm1;
  if (name == "thm3") return Shape::thm3;
  if (name == "thm4") return Shape::thm4;
  throw ConfigError("unknown shape '" + name + "' (thm1, thm3, thm4)");
}

double shape_value(Shape s, double Psi, double E, double eps) {
  switch (s) {
    case Shape::thm1: return std::pow(Psi, 2.0 / 3.0) * std::pow(std::log(Psi + 2), 2 + eps);
    case Shape::thm3: return std::sqrt(Psi) * std::pow(std::log(Psi + 2), 2 + eps);
    case Shape::thm4: return std::sqrt(Psi + E) * std::pow(std::log(Psi + E + 2), 2 + eps);
  }
  return 0;
}

ExperimentResult run_count_experiment(const measures::MeasureModel& m, const seq::SeqRecord& s, const ApproxFn& psi,
                                      const ExperimentConfig& cfg) {
  if (cfg.samples == 0) throw DomainError("run_count_experiment: samples must be at least 1");
  ExperimentResult res;
  res.config = cfg;
  if (res.config.N == 0) res.config.N = s.size();
  const std::size_t N = res.config.N;
  res.measure = m.name();
  res.sequence = seq::to_string(s.kind());
  res.psi = psi.describe();
  const CountPlan plan(s, psi, N);
  const unsigned P = cfg.precision ? cfg.precision : plan.required_precision();
  if (P < plan.required_precision())
    throw PreconditionError("precision " + std::to_string(P) + " bits is below the required " +
                            std::to_string(plan.required_precision()) + " bits");
  auto& sum = res.summary;
  sum.precision = P;
  sum.Psi = psi_sum(s, psi, N);
  if (cfg.shape == Shape::thm4 || cfg.compute_E) sum.E = error_E(s, psi, N);
  if (m.is_lebesgue()) {
    Kahan k;
    for (double v : plan.psi()) k.add(std::min(1.0, 2 * v));
    sum.expected_R = k.sum;
  } else {
    sum.expected_R = std::numeric_limits<double>::quiet_NaN();
  }
  const double bound = cfg.shape_constant * shape_value(cfg.shape, sum.Psi, sum.E.value_or(0.0), cfg.eps);

  res.reports.resize(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t i) {
    const auto pt = HighPrecisionPoint::draw(m, derive_seed(cfg.seed, i), cfg.gamma, P);
    CountReport r;
    r.sample = i;
    r.N = N;
    r.R = plan.count(pt);
    r.Psi = sum.Psi;
    r.E = sum.E;
    r.residual = static_cast<double>(r.R) - 2 * sum.Psi;
    r.shape_bound = bound;
    res.reports[i] = r;
  });

  std::vector<double> rel;
  std::size_t within = 0;
  double total = 0;
  sum.min_R = std::numeric_limits<std::size_t>::max();
  for (const auto& r : res.reports) {
    rel.push_back(std::abs(static_cast<double>(r.R) / (2 * sum.Psi) - 1));
    within += std::abs(r.residual) <= r.shape_bound;
    total += static_cast<double>(r.R);
    sum.min_R = std::min(sum.min_R, r.R);
    sum.max_R = std::max(sum.max_R, r.R);
  }
  std::sort(rel.begin(), rel.end());
  const std::size_t k = rel.size();
  sum.median_abs_rel = k % 2 ? rel[k / 2] : 0.5 * (rel[k / 2 - 1] + rel[k / 2]);
  sum.fraction_within = static_cast<double>(within) / static_cast<double>(k);
  sum.mean_R = total / static_cast<double>(k);
  return res;
}

std::string ExperimentResult::to_csv() const {
  std::string out = "sample,N,R,Psi,E,residual,shape_bound\n";
  for (const auto& r : reports) {
    out += std::to_string(r.sample) + ',' + std::to_string(r.N) + ',' + std::to_string(r.R) + ',' + fmt(r.Psi) + ',' +
           (r.E ? fmt(*r.E) : std::string()) + ',' + fmt(r.residual) + ',' + fmt(r.shape_bound) + '\n';
  }
  return out;
}

std::string ExperimentResult::summary_json() const {
  nlohmann::ordered_json j;
  j["config"] = {{"measure", measure},
                 {"sequence", sequence},
                 {"psi", psi},
                 {"shape", to_string(config.shape)},
                 {"eps", config.eps},
                 {"shape_constant", config.shape_constant},
                 {"gamma", config.gamma},
                 {"N", config.N},
                 {"samples", config.samples},
                 {"seed", config.seed},
                 {"precision", summary.precision}};
  j["Psi"] = summary.Psi;
  j["E"] = summary.E ? nlohmann::ordered_json(*summary.E) : nlohmann::ordered_json();
  j["expected_R"] = std::isnan(summary.expected_R) ? nlohmann::ordered_json() : nlohmann::ordered_json(summary.expected_R);
  j["median_abs_rel"] = summary.median_abs_rel;
  j["fraction_within_shape"] = summary.fraction_within;
  j["min_R"] = summary.min_R;
  j["max_R"] = summary.max_R;
  j["mean_R"] = summary.mean_R;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- Appendix D

SumLemmaReport sum_lemma_oracles(std::span<const double> s, std::size_t a, std::size_t b, double gamma) {
  if (!(gamma > 0)) throw DomainError("sum_lemma_oracles: gamma must be positive");
  if (a < 2 || a >= b || b > s.size()) throw DomainError("sum_lemma_oracles: need 2 <= a < b <= len");
  for (double v : s)
    if (!(v >= 0 && v <= 1)) throw DomainError("sum_lemma_oracles: entries must lie in [0,1]");
  std::vector<double> S(b + 1, 0.0);
  for (std::size_t k = 1; k <= b; ++k) S[k] = S[k - 1] + s[k - 1];
  constexpr double rel = 1e-12;
  auto le = [](double x, double y) { return x <= y + rel * (std::abs(y) + 1e-300) + 1e-300; };
  auto lt = [](double x, double y) { return x < y + rel * std::abs(y); };
  const double logc = gamma * std::log((gamma + 1) / gamma);
  auto tilde = [&](std::size_t k) { return std::max(gamma, S[k]); };
  SumLemmaReport out;

  auto& A1 = out.A1;
  A1.applicable = S[a - 1] >= gamma;
  if (A1.applicable) {
    for (std::size_t k = a; k <= b; ++k) A1.lhs += s[k - 1] / S[k];
    const double D = std::log(S[b]) - std::log(S[a - 1]);
    A1.lower = gamma / (gamma + 1) * D;
    A1.rhs = D / logc;
    A1.holds = le(A1.lower, A1.lhs) && le(A1.lhs, A1.rhs);
  }

  auto& A2 = out.A2;
  A2.applicable = true;
  for (std::size_t k = a; k <= b; ++k) A2.lhs += s[k - 1] / tilde(k);
  A2.rhs = S[a] > 0 ? 1 + 1 / gamma + (std::log(S[b]) - std::log(S[a])) / logc : std::numeric_limits<double>::infinity();
  A2.holds = lt(A2.lhs, A2.rhs);

  auto& A3 = out.A3;
  A3.applicable = S[a - 1] > 0;
  if (A3.applicable) {
    for (std::size_t k = a; k <= b; ++k) A3.lhs += s[k - 1] / (S[k] * S[k]);
    A3.rhs = 1 / S[a - 1] - 1 / S[b];
    A3.holds = le(A3.lhs, A3.rhs);
  }

  auto& A4 = out.A4;
  A4.applicable = true;
  for (std::size_t k = 1; k <= b; ++k) A4.lhs += s[k - 1] / (tilde(k) * tilde(k));
  A4.rhs = (2 * gamma + 1) / (gamma * gamma);
  A4.holds = lt(A4.lhs, A4.rhs);
  return out;
}

}  // namespace khintchine::counting
