#include "khintchine/measures.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include "khintchine/errors.hpp"
#include "khintchine/parallel.hpp"
#include "khintchine/rng.hpp"
#include "khintchine/windows.hpp"

namespace khintchine::measures {

using arith::BigInt;
using u128 = unsigned __int128;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// e^{-2 pi i f} for a phase f given modulo 1.
cplx unit(long double f) {
  f -= std::floor(f);
  if (f > 0.5L) f -= 1.0L;
  return std::polar(1.0, -kTwoPi * static_cast<double>(f));
}

std::uint64_t pos_mod(std::int64_t a, std::uint64_t m) {
  const std::int64_t r = a % static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(m) : r);
}

std::uint64_t big_mod(const BigInt& t, std::uint64_t m) {
  BigInt r = t % m;
  if (r < 0) r += m;
  return static_cast<std::uint64_t>(r);
}

// x / d for 0 <= x < d, as a double in [0,1).
double big_ratio(const BigInt& x, const BigInt& d) {
  const BigInt scaled = (x << 64) / d;
  return static_cast<double>(static_cast<std::uint64_t>(scaled)) * 0x1.0p-64;
}

Rational reduced(std::int64_t num, std::uint64_t den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  const std::uint64_t g = std::gcd(static_cast<std::uint64_t>(num < 0 ? -num : num), den);
  if (g > 1) {
    num /= static_cast<std::int64_t>(g);
    den /= g;
  }
  return {num, den};
}

void check_probs(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + ": empty");
  double s = 0;
  for (double w : p) {
    if (!(w >= 0)) throw ConfigError(std::string(what) + ": negative weight");
    s += w;
  }
  if (std::abs(s - 1) > 1e-12) throw ConfigError(std::string(what) + ": weights must sum to 1");
}

std::optional<std::uint64_t> common_period(const std::vector<Rational>& atoms) {
  std::uint64_t L = 1;
  for (const auto& a : atoms) {
    const std::uint64_t g = std::gcd(L, a.den);
    const u128 next = static_cast<u128>(L / g) * a.den;
    if (next >= (u128{1} << 63)) return std::nullopt;
    L = static_cast<std::uint64_t>(next);
  }
  return L;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError("not a number: '" + s + "'");
  return v;
}

}  // namespace

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite rational");
  if (x == 0) return {0, 1};
  int e = 0;
  const double f = std::frexp(x, &e);
  // x = M * 2^{e-53}
  const auto M = static_cast<std::int64_t>(std::ldexp(f, 53));
  const int shift = 53 - e;
  if (shift <= 0) {
    if (e > 62) throw RangeError("rational out of range");
    return {static_cast<std::int64_t>(std::ldexp(static_cast<double>(M), -shift)), 1};
  }
  if (shift <= 62) return reduced(M, std::uint64_t{1} << shift);
  return reduced(std::llround(std::ldexp(x, 62)), std::uint64_t{1} << 62);
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  auto parse_int = [&](const std::string& s) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError("not a rational: '" + text + "'");
    return v;
  };
  if (slash != std::string::npos) {
    const std::int64_t d = parse_int(text.substr(slash + 1));
    if (d <= 0) throw ConfigError("not a rational: '" + text + "'");
    return reduced(parse_int(text.substr(0, slash)), static_cast<std::uint64_t>(d));
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return {parse_int(text), 1};
  const std::string frac = text.substr(dot + 1);
  if (frac.size() > 17 || frac.find_first_not_of("0123456789") != std::string::npos)
    return from_double(parse_double(text));
  std::string ip = text.substr(0, dot);
  const bool neg = !ip.empty() && ip[0] == '-';
  if (ip.empty() || ip == "-" || ip == "+") ip += "0";
  std::uint64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t whole = parse_int(ip);
  const std::int64_t part = frac.empty() ? 0 : parse_int(frac);
  const std::int64_t num = whole * static_cast<std::int64_t>(den) + (neg ? -part : part);
  return reduced(num, den);
}

MeasureModel::MeasureModel(Variant v, std::string name) : v_(std::move(v)), name_(std::move(name)) {
  if (auto* a = std::get_if<AtomicFinite>(&v_)) {
    if (a->points.size() != a->weights.size()) throw ConfigError("atomic measure: points and weights differ in length");
    check_probs(a->weights, "atomic measure");
    for (const auto& p : a->points)
      if (p.num < 0 || static_cast<std::uint64_t>(p.num) >= p.den) throw ConfigError("atomic measure: point outside [0,1)");
    atoms_ = a->points;
    atom_w_ = a->weights;
    period_ = common_period(atoms_);
  } else if (auto* e = std::get_if<Empirical>(&v_)) {
    if (e->samples.empty()) throw ConfigError("empirical measure: no samples");
    atoms_.reserve(e->samples.size());
    for (double x : e->samples) {
      if (!(x >= 0 && x < 1)) throw ConfigError("empirical measure: sample outside [0,1)");
      atoms_.push_back(Rational::from_double(x));
    }
    atom_w_.assign(atoms_.size(), 1.0 / static_cast<double>(atoms_.size()));
    period_ = common_period(atoms_);
  } else if (auto* s = std::get_if<SelfSimilar>(&v_)) {
    const double r = s->ratio.value();
    if (!(r > 0 && r < 1)) throw ConfigError("self-similar measure: ratio must lie in (0,1)");
    if (s->offsets.size() != s->probs.size()) throw ConfigError("self-similar measure: offsets and probs differ in length");
    check_probs(s->probs, "self-similar measure");
    for (const auto& d : s->offsets) {
      const double v = d.value();
      if (v < 0 || v + r > 1 + 1e-15) throw ConfigError("self-similar measure: map does not send [0,1] into [0,1]");
    }
  } else {
    period_ = 1;
  }
}

MeasureModel MeasureModel::lebesgue() { return MeasureModel(Lebesgue{}, "lebesgue"); }

MeasureModel MeasureModel::atomic(std::vector<Rational> points, std::vector<double> weights) {
  return MeasureModel(AtomicFinite{std::move(points), std::move(weights)}, "atomic");
}

MeasureModel MeasureModel::self_similar(Rational ratio, std::vector<Rational> offsets, std::vector<double> probs,
                                        std::string name) {
  return MeasureModel(SelfSimilar{ratio, std::move(offsets), std::move(probs)}, std::move(name));
}

MeasureModel MeasureModel::cantor() { return self_similar({1, 3}, {{0, 1}, {2, 3}}, {0.5, 0.5}, "cantor"); }

MeasureModel MeasureModel::empirical(std::vector<double> samples, std::string name) {
  return MeasureModel(Empirical{std::move(samples)}, std::move(name));
}

MeasureModel MeasureModel::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "lebesgue") return lebesgue();
  if (head == "cantor") return cantor();
  if (head == "atomic") {
    std::vector<Rational> pts;
    std::vector<double> w;
    for (const auto& item : split(body, ',')) {
      const auto at = item.find('@');
      pts.push_back(Rational::parse(item.substr(0, at)));
      w.push_back(at == std::string::npos ? 1.0 : parse_double(item.substr(at + 1)));
    }
    if (pts.size() == 1 && body.find('@') == std::string::npos) w = {1.0};
    return atomic(std::move(pts), std::move(w));
  }
  if (head == "selfsimilar") {
    const auto parts = split(body, ';');
    if (parts.size() != 3) throw ConfigError("selfsimilar spec is r;d1,d2,...;p1,p2,...");
    std::vector<Rational> d;
    std::vector<double> p;
    for (const auto& x : split(parts[1], ',')) d.push_back(Rational::parse(x));
    for (const auto& x : split(parts[2], ',')) p.push_back(parse_double(x));
    return self_similar(Rational::parse(parts[0]), std::move(d), std::move(p));
  }
  if (head == "empirical") return empirical(read_empirical(body), "empirical:" + body);
  throw ConfigError("unknown measure '" + spec + "'");
}

std::vector<double> read_empirical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open empirical sample file '" + path + "'");
  std::vector<double> out;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    double v = 0;
    const auto* end = line.data() + line.size();
    const auto r = std::from_chars(line.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end || !(v >= 0 && v < 1))
      throw ConfigError(path + ": line " + std::to_string(no) + ": expected a decimal in [0,1)");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(path + ": no samples");
  return out;
}

// ---------------------------------------------------------------- transforms

namespace {

cplx atoms_residue(const MeasureModel& m, std::uint64_t r) {
  cplx acc = 0;
  const auto& atoms = m.atoms();
  const auto& w = m.atom_weights();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::uint64_t den = atoms[i].den;
    const std::uint64_t k = static_cast<std::uint64_t>(static_cast<u128>(r % den) * pos_mod(atoms[i].num, den) % den);
    acc += w[i] * unit(static_cast<long double>(k) / static_cast<long double>(den));
  }
  return acc;
}

cplx self_similar_real(const SelfSimilar& s, long double t) {
  cplx acc = 1;
  const long double r = static_cast<long double>(s.ratio.num) / static_cast<long double>(s.ratio.den);
  for (long double tj = t; std::abs(tj) >= 1e-12L; tj *= r) {
    cplx f = 0;
    for (std::size_t i = 0; i < s.offsets.size(); ++i)
      f += s.probs[i] *
           unit(tj * static_cast<long double>(s.offsets[i].num) / static_cast<long double>(s.offsets[i].den));
    acc *= f;
    if (acc == cplx(0)) break;
  }
  return acc;
}

// Exact phases while |t r^j| is large, then the floating product.
cplx self_similar_int(const SelfSimilar& s, const BigInt& t) {
  const BigInt a = s.ratio.num, b = s.ratio.den;
  BigInt Tj = t, Bj = 1;
  cplx acc = 1;
  const BigInt switch_at = BigInt(1) << 20;
  for (;;) {
    const BigInt mag = abs(Tj) / Bj;
    if (mag < switch_at) break;
    cplx f = 0;
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
      const BigInt D = Bj * s.offsets[i].den;
      BigInt X = (Tj * s.offsets[i].num) % D;
      if (X < 0) X += D;
      f += s.probs[i] * unit(big_ratio(X, D));
    }
    acc *= f;
    if (acc == cplx(0)) return acc;
    Tj *= a;
    Bj *= b;
  }
  // remaining factor is mu_hat(Tj / Bj); reduce to a long double argument
  const BigInt whole = Tj / Bj;
  BigInt rem = Tj - whole * Bj;
  if (rem < 0) rem = -rem;
  long double y = static_cast<long double>(static_cast<std::int64_t>(whole));
  const double frac = big_ratio(rem, Bj);
  y += (Tj < 0 ? -1.0L : 1.0L) * frac;
  return acc * self_similar_real(s, y);
}

}  // namespace

cplx mu_hat_residue(const MeasureModel& m, std::uint64_t r) {
  if (!m.integer_period()) throw PreconditionError("mu_hat_residue: model has no integer period");
  if (m.is_lebesgue()) return 0;
  return atoms_residue(m, r % *m.integer_period());
}

cplx mu_hat(const MeasureModel& m, const BigInt& t) {
  if (t == 0) return 1;
  if (m.is_lebesgue()) return 0;
  if (const auto* s = std::get_if<SelfSimilar>(&m.variant())) return self_similar_int(*s, t);
  if (m.integer_period()) return atoms_residue(m, big_mod(t, *m.integer_period()));
  cplx acc = 0;
  for (std::size_t i = 0; i < m.atoms().size(); ++i) {
    const auto& x = m.atoms()[i];
    const std::uint64_t k = static_cast<std::uint64_t>(static_cast<u128>(big_mod(t, x.den)) * pos_mod(x.num, x.den) % x.den);
    acc += m.atom_weights()[i] * unit(static_cast<long double>(k) / static_cast<long double>(x.den));
  }
  return acc;
}

cplx mu_hat(const MeasureModel& m, double t) {
  if (t == 0) return 1;
  if (t == std::rint(t) && std::abs(t) < 0x1.0p62) return mu_hat(m, BigInt(static_cast<std::int64_t>(t)));
  return std::visit(
      [&](const auto& v) -> cplx {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Lebesgue>) {
          const cplx z(0, -kTwoPi * t);
          return (std::exp(z) - 1.0) / z;
        } else if constexpr (std::is_same_v<T, SelfSimilar>) {
          return self_similar_real(v, t);
        } else {
          cplx acc = 0;
          for (std::size_t i = 0; i < m.atoms().size(); ++i) {
            const auto& x = m.atoms()[i];
            acc += m.atom_weights()[i] *
                   unit(static_cast<long double>(t) * static_cast<long double>(x.num) / static_cast<long double>(x.den));
          }
          return acc;
        }
      },
      m.variant());
}

MultipleProbe::MultipleProbe(const MeasureModel& m, const arith::FactoredNat& q) : m_(&m) {
  if (auto L = m.integer_period())
    q_mod_ = arith::mod_u64(q, *L);
  else
    q_big_ = arith::to_bigint(q);
}

cplx MultipleProbe::operator()(std::int64_t s) const {
  if (s == 0) return 1;
  if (q_mod_) {
    const std::uint64_t L = *m_->integer_period();
    const std::uint64_t sa = static_cast<std::uint64_t>(s < 0 ? -s : s) % L;
    const cplx v = mu_hat_residue(*m_, static_cast<std::uint64_t>(static_cast<u128>(sa) * *q_mod_ % L));
    return s < 0 ? std::conj(v) : v;
  }
  return mu_hat(*m_, q_big_ * s);
}

// ---------------------------------------------------------------- decay profile

DecayProfile decay_profile(const MeasureModel& m, double A, int j_max, int j_min, int threads) {
  if (!(A > 0)) throw DomainError("decay_profile: A must be positive");
  if (j_min < 0 || j_max < j_min || j_max > 60) throw DomainError("decay_profile: need 0 <= j_min <= j_max <= 60");
  DecayProfile out;
  out.A = A;
  out.rows.resize(static_cast<std::size_t>(j_max - j_min + 1));
  std::optional<std::uint64_t> structured_base;
  if (const auto* s = std::get_if<SelfSimilar>(&m.variant()); s && s->ratio.num == 1) structured_base = s->ratio.den;

  parallel_for(out.rows.size(), threads, [&](std::size_t idx) {
    const int j = j_min + static_cast<int>(idx);
    DecayRow row;
    row.j = j;
    row.t_lo = std::ldexp(1.0, j);
    auto weight = [A](double t) { return std::pow(std::log(t), A); };
    for (int i = 0; i < kGridPerBlock; ++i) {
      const double t = std::ldexp(std::exp2(static_cast<double>(i) / kGridPerBlock), j);
      row.sup_grid = std::max(row.sup_grid, std::abs(mu_hat(m, t)) * weight(t));
    }
    const std::uint64_t lo = std::uint64_t{1} << j, width = lo;
    std::vector<std::uint64_t> ints;
    if (width <= static_cast<std::uint64_t>(kGridPerBlock)) {
      for (std::uint64_t n = lo; n < lo + width; ++n) ints.push_back(n);
    } else {
      for (int i = 0; i < kGridPerBlock; ++i)
        ints.push_back(lo + static_cast<std::uint64_t>(static_cast<u128>(width) * i / kGridPerBlock));
    }
    if (structured_base && *structured_base >= 2) {
      for (u128 p = 1; p < 2 * static_cast<u128>(lo); p *= *structured_base)
        if (p >= lo) ints.push_back(static_cast<std::uint64_t>(p));
    }
    for (std::uint64_t n : ints) {
      const double t = static_cast<double>(n);
      row.sup_integer = std::max(row.sup_integer, std::abs(mu_hat(m, BigInt(n))) * weight(t));
    }
    row.value = std::max(row.sup_grid, row.sup_integer);
    out.rows[idx] = row;
  });
  double run = 0;
  for (auto& r : out.rows) r.running_max = run = std::max(run, r.value);
  const std::size_t n = out.rows.size();
  const std::size_t quarter = std::max<std::size_t>(1, n / 4);
  double first = 0, last = 0;
  for (std::size_t i = 0; i < quarter; ++i) first = std::max(first, out.rows[i].running_max);
  for (std::size_t i = n - quarter; i < n; ++i) last = std::max(last, out.rows[i].running_max);
  out.consistent = last <= 2 * first;
  return out;
}

// ---------------------------------------------------------------- sampling

std::vector<double> sample(const MeasureModel& m, std::uint64_t seed, std::size_t n, int precision_bits) {
  if (n == 0) throw DomainError("sample: n must be positive");
  if (precision_bits < 1) throw DomainError("sample: precision must be positive");
  CounterRng rng(seed);
  std::vector<double> out(n);
  const double below_one = std::nextafter(1.0, 0.0);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Lebesgue>) {
          for (auto& x : out) x = rng.uniform();
        } else if constexpr (std::is_same_v<T, Empirical>) {
          for (auto& x : out) x = v.samples[rng.below(v.samples.size())];
        } else if constexpr (std::is_same_v<T, AtomicFinite>) {
          std::vector<double> cdf(v.weights.size());
          std::partial_sum(v.weights.begin(), v.weights.end(), cdf.begin());
          for (auto& x : out) {
            const double u = rng.uniform() * cdf.back();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            if (it == cdf.end()) --it;
            x = v.points[static_cast<std::size_t>(it - cdf.begin())].value();
          }
        } else {
          const double r = v.ratio.value();
          const int depth = static_cast<int>(std::ceil(precision_bits / std::log2(1 / r)));
          std::vector<double> cdf(v.probs.size());
          std::partial_sum(v.probs.begin(), v.probs.end(), cdf.begin());
          std::vector<double> d(v.offsets.size());
          for (std::size_t i = 0; i < d.size(); ++i) d[i] = v.offsets[i].value();
          std::vector<std::size_t> word(static_cast<std::size_t>(depth));
          for (auto& x : out) {
            for (auto& w : word) {
              auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * cdf.back());
              if (it == cdf.end()) --it;
              w = static_cast<std::size_t>(it - cdf.begin());
            }
            double y = 0;
            for (auto it = word.rbegin(); it != word.rend(); ++it) y = r * y + d[*it];
            x = std::min(y, below_one);
          }
        }
      },
      m.variant());
  return out;
}

// ---------------------------------------------------------------- masses

MassMethod parse_mass_method(const std::string& name) {
  if (name == "auto" || name == "automatic") return MassMethod::automatic;
  if (name == "exact") return MassMethod::exact;
  if (name == "subdivision") return MassMethod::subdivision;
  if (name == "monte_carlo" || name == "mc") return MassMethod::monte_carlo;
  throw ConfigError("unknown mass method '" + name + "'");
}

namespace {

bool atom_hit(const Rational& x, std::uint64_t q, double gamma, double psi_q) {
  const std::uint64_t k =
      static_cast<std::uint64_t>(static_cast<u128>(q % x.den) * pos_mod(x.num, x.den) % x.den);
  const double frac = static_cast<double>(static_cast<long double>(k) / static_cast<long double>(x.den));
  return windows::dist_to_int(frac - gamma) <= psi_q;
}

MassEstimate subdivision_mass(const SelfSimilar& s, std::uint64_t q, double gamma, double psi_q, const MassOptions& opt) {
  const auto E = windows::E_q_intervals(q, gamma, psi_q);
  const double r = s.ratio.value();
  std::vector<double> d(s.offsets.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.offsets[i].value();
  const double h0 = *std::min_element(d.begin(), d.end()) / (1 - r);
  const double h1 = *std::max_element(d.begin(), d.end()) / (1 - r);
  constexpr double margin = 1e-14;

  // 1 inside one interval, -1 disjoint from all, 0 otherwise
  auto classify = [&](double a, double b) {
    auto it = std::lower_bound(E.begin(), E.end(), a, [](const windows::Interval& iv, double x) { return iv.hi < x; });
    if (it == E.end() || it->lo > b) return -1;
    return (it->lo <= a && b <= it->hi) ? 1 : 0;
  };

  struct Node {
    double c, len, mass;
    int depth;
  };
  MassEstimate est;
  est.method = MassMethod::subdivision;
  std::vector<Node> stack{{0.0, 1.0, 1.0, 0}};
  double inside = 0, boundary = 0;
  std::size_t visited = 0;
  while (!stack.empty()) {
    const Node n = stack.back();
    stack.pop_back();
    ++visited;
    const double a = n.c + n.len * h0 - margin, b = n.c + n.len * h1 + margin;
    const int cls = classify(a, b);
    if (cls == 1) {
      inside += n.mass;
    } else if (cls == 0) {
      if (n.depth >= opt.depth_cap || visited + stack.size() >= opt.node_budget) {
        boundary += n.mass;
      } else {
        for (std::size_t i = 0; i < d.size(); ++i)
          if (s.probs[i] > 0) stack.push_back({n.c + n.len * d[i], n.len * r, n.mass * s.probs[i], n.depth + 1});
      }
    }
  }
  est.lo = inside;
  est.hi = std::min(1.0, inside + boundary);
  est.value = 0.5 * (est.lo + est.hi);
  est.work = visited;
  return est;
}

}  // namespace

MassEstimate mu_E_mass(const MeasureModel& m, std::uint64_t q, double gamma, double psi_q, MassMethod method,
                       const MassOptions& opt) {
  if (q == 0) throw DomainError("mu_E_mass: q must be positive");
  if (!(psi_q >= 0)) throw DomainError("mu_E_mass: psi must be nonnegative");
  if (method == MassMethod::automatic) method = m.is_self_similar() ? MassMethod::subdivision : MassMethod::exact;
  MassEstimate est;
  est.method = method;
  switch (method) {
    case MassMethod::exact:
      if (m.is_self_similar()) throw ConfigError("mass method 'exact' is not available for self-similar measures");
      if (m.is_lebesgue()) {
        est.value = windows::total_length(windows::E_q_intervals(q, gamma, psi_q));
      } else {
        double acc = 0;
        for (std::size_t i = 0; i < m.atoms().size(); ++i)
          if (atom_hit(m.atoms()[i], q, gamma, psi_q)) acc += m.atom_weights()[i];
        est.value = std::min(acc, 1.0);
        est.work = m.atoms().size();
      }
      est.lo = est.hi = est.value;
      return est;
    case MassMethod::subdivision:
      if (!m.is_self_similar()) throw ConfigError("mass method 'subdivision' needs a self-similar measure");
      return subdivision_mass(std::get<SelfSimilar>(m.variant()), q, gamma, psi_q, opt);
    case MassMethod::monte_carlo: {
      const auto xs = sample(m, opt.seed, opt.mc_samples);
      std::size_t hits = 0;
      for (double x : xs) hits += atom_hit(Rational::from_double(x), q, gamma, psi_q);
      const double n = static_cast<double>(xs.size()), p = hits / n;
      // Wilson score interval at 99%
      constexpr double z = 2.5758293035489004;
      const double denom = 1 + z * z / n;
      const double centre = (p + z * z / (2 * n)) / denom;
      const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
      est.value = p;
      est.lo = std::max(0.0, centre - half);
      est.hi = std::min(1.0, centre + half);
      est.work = xs.size();
      return est;
    }
    default:
      break;
  }
  throw ConfigError("unsupported mass method");
}

// ---------------------------------------------------------------- Lemma 2 and series

Lem2Bounds lem2_bounds(const MeasureModel& m, const arith::FactoredNat& q, double psi_q, std::int64_t s_cap) {
  if (s_cap < 1000) throw PreconditionError("lem2_bounds: s_cap must be at least 1000");
  const MultipleProbe probe(m, q);
  Lem2Bounds b;
  double m_last = 0, m_prev = 0;
  for (std::int64_t s = 1; s <= s_cap; ++s) {
    const double a = std::abs(probe(s));
    b.max_abs = std::max(b.max_abs, a);
    b.series_partial += a / static_cast<double>(s);
    if (2 * s > s_cap)
      m_last = std::max(m_last, a);
    else if (4 * s > s_cap)
      m_prev = std::max(m_prev, a);
  }
  if (m_last == 0) {
    b.series_tail = 0;
  } else if (m_prev > 0 && m_last < m_prev) {
    const double rho = m_last / m_prev;
    b.series_tail = m_last * std::numbers::ln2 * rho / (1 - rho);
  } else {
    b.series_tail = std::numeric_limits<double>::infinity();
  }
  b.bound1 = 3 * psi_q + 3 * b.max_abs;
  b.bound2 = 3 * psi_q + 2 * (b.series_partial + b.series_tail);
  return b;
}

ConvConditions conv_conditions(const MeasureModel& m, const seq::SeqRecord& s, std::int64_t s_cap, std::size_t N,
                               double tol) {
  if (s_cap < 1000) throw PreconditionError("conv_conditions: s_cap must be at least 1000");
  if (N == 0) N = s.size();
  if (N > s.size()) throw DomainError("conv_conditions: N exceeds the sequence length");
  ConvConditions out;
  out.tol = tol;
  double pa = 0, pb = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    const MultipleProbe probe(m, s.q(n));
    double mx = 0, wsum = 0;
    for (std::int64_t k = 1; k <= s_cap; ++k) {
      const double a = std::abs(probe(k));
      mx = std::max(mx, a);
      wsum += a / static_cast<double>(k);
    }
    wsum *= 2;
    out.max_series.push_back({n, mx, pa += mx});
    out.weighted_series.push_back({n, wsum, pb += wsum});
  }
  auto settles = [&](const std::vector<SeriesRow>& rows) {
    const std::size_t start = rows.size() - std::max<std::size_t>(1, rows.size() / 4);
    for (std::size_t i = start; i < rows.size(); ++i)
      if (!(rows[i].term < tol)) return false;
    return true;
  };
  out.max_converges = settles(out.max_series);
  out.weighted_converges = settles(out.weighted_series);
  return out;
}

std::vector<DelRow> del_criterion(const MeasureModel& m, const seq::SeqRecord& s, std::int64_t h, std::size_t N_max) {
  if (h == 0) throw DomainError("del_criterion: h must be nonzero");
  if (N_max == 0 || N_max > s.size()) throw DomainError("del_criterion: N_max must lie in [1, len]");
  const auto L = m.integer_period();
  std::vector<std::uint64_t> res;
  std::vector<BigInt> big;
  if (L && !m.is_lebesgue()) {
    res.reserve(N_max);
    for (std::size_t n = 1; n <= N_max; ++n) res.push_back(arith::mod_u64(s.q(n), *L));
  } else if (!L) {
    big.reserve(N_max);
    for (std::size_t n = 1; n <= N_max; ++n) big.push_back(arith::to_bigint(s.q(n)));
  }
  const std::uint64_t h_mod = L ? pos_mod(h, *L) : 0;
  std::vector<DelRow> rows;
  rows.reserve(N_max);
  double inner = 0, partial = 0;
  for (std::size_t N = 1; N <= N_max; ++N) {
    double cross = 0;
    if (!m.is_lebesgue()) {
      for (std::size_t k = 1; k < N; ++k) {
        cplx v;
        if (L) {
          const std::uint64_t diff = (res[N - 1] + *L - res[k - 1]) % *L;
          v = mu_hat_residue(m, static_cast<std::uint64_t>(static_cast<u128>(h_mod) * diff % *L));
        } else {
          v = mu_hat(m, (big[N - 1] - big[k - 1]) * h);
        }
        cross += v.real();
      }
    }
    inner += 1 + 2 * cross;
    const double Nd = static_cast<double>(N);
    const double inc = inner / (Nd * Nd * Nd);
    partial += inc;
    rows.push_back({N, inner, partial, inc});
  }
  return rows;
}

bool cauchy_beyond(const std::vector<DelRow>& rows, std::size_t N_from, double tol) {
  bool any = false;
  for (const auto& r : rows) {
    if (r.N < N_from) continue;
    any = true;
    if (!(std::abs(r.increment) < tol)) return false;
  }
  return any;
}

// ---------------------------------------------------------------- lacunary reduction

DecreasingFn DecreasingFn::loglog_power(double eps) {
  if (!(eps > 0)) throw DomainError("loglog_power: eps must be positive");
  return {"loglog:" + std::to_string(eps), [eps](double v) { return std::pow(v, -(1 + eps)); }};
}

DecreasingFn DecreasingFn::inv_log() {
  return {"invlog", [](double v) { return std::exp(-v); }};
}

DecreasingFn DecreasingFn::constant() {
  return {"const", [](double) { return 1.0; }};
}

DecreasingFn DecreasingFn::parse(const std::string& spec) {
  if (spec == "invlog") return inv_log();
  if (spec == "const") return constant();
  if (spec.rfind("loglog:", 0) == 0) return loglog_power(parse_double(spec.substr(7)));
  throw ConfigError("unknown decreasing function '" + spec + "'");
}

namespace {

// Integral of g over [a, b] on panels of bounded relative width.
template <class G>
double integrate(G g, double a, double b) {
  if (!(b > a)) return 0;
  double total = 0;
  double lo = a;
  while (lo < b) {
    double hi = lo > 1 ? std::min(b, 2 * lo) : std::min(b, lo + 1);
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 8, 1e-13);
    lo = hi;
  }
  return total;
}

}  // namespace

ReductionReport del_lacunary_reduction(const DecreasingFn& f, double K, double loglog_max, std::uint64_t direct_max,
                                       double tol) {
  if (!(K > 1)) throw DomainError("del_lacunary_reduction: K must exceed 1");
  const double v0 = std::log(std::log(3.0));
  if (!(loglog_max > v0)) throw DomainError("del_lacunary_reduction: loglog_max too small");
  if (direct_max < 4) throw DomainError("del_lacunary_reduction: direct_max too small");
  {
    double prev = f.f_loglog(v0);
    for (int i = 1; i <= 400; ++i) {
      const double v = v0 + (loglog_max - v0) * std::pow(i / 400.0, 3);
      const double cur = f.f_loglog(v);
      if (!(cur <= prev * (1 + 1e-12) + 1e-300)) throw PreconditionError("del_lacunary_reduction: f is not decreasing");
      prev = cur;
    }
  }
  const double lnK = std::log(K), llK = std::log(lnK);
  // term of A at n, term of B at n (n >= start)
  auto termA = [&](double n) { return f.f_loglog(std::log(std::log(n))) / (n * std::log(n)); };
  auto lnKn1 = [&](double n) { return n * lnK + std::log1p(-std::exp(-n * lnK)); };
  auto termB = [&](double n) { return f.f_loglog(std::log(lnKn1(n))) / n; };
  const double startA = 3;
  double startB = 1;
  while (lnKn1(startB) < std::log(3.0) - 1e-12) ++startB;

  // prefix sums of the terms up to direct_max
  std::vector<double> prefA(direct_max + 1, 0.0), prefB(direct_max + 1, 0.0);
  for (std::uint64_t n = 1; n <= direct_max; ++n) {
    const double x = static_cast<double>(n);
    prefA[n] = prefA[n - 1] + (x >= startA ? termA(x) : 0.0);
    prefB[n] = prefB[n - 1] + (x >= startB ? termB(x) : 0.0);
  }
  const double D = static_cast<double>(direct_max);
  auto fv = [&](double u) { return f.f_loglog(u); };
  // B integrates in w = ln x
  auto intB = [&](double w1, double w2) {
    return integrate(
        [&](double w) {
          const double x = std::exp(w);
          const double L = x * lnK > 40 ? w + llK : std::log(lnKn1(x));
          return f.f_loglog(L);
        },
        w1, w2);
  };
  // Bracket of sum_{n<=N} for ln ln N = v; past direct_max the remainder
  // sum_{D < n <= N} g lies in [int_{D+1}^{N+1} g, int_D^N g].
  auto evalA = [&](double v) -> std::pair<double, double> {
    if (v < std::log(std::log(D))) {
      const auto N = static_cast<std::uint64_t>(std::floor(std::exp(std::exp(v))));
      return {prefA[N], prefA[N]};
    }
    return {prefA[direct_max] + integrate(fv, std::log(std::log(D + 1)), v),
            prefA[direct_max] + integrate(fv, std::log(std::log(D)), v)};
  };
  auto evalB = [&](double v) -> std::pair<double, double> {
    const double w = v - llK;  // ln of ln N / ln K
    if (w < std::log(D)) {
      const auto N = static_cast<std::uint64_t>(std::floor(std::exp(w)));
      return {prefB[N], prefB[N]};
    }
    const double w_up = w < 40 ? std::log(std::floor(std::exp(w)) + 1) : w;
    return {prefB[direct_max] + intB(std::log(D + 1), w_up), prefB[direct_max] + intB(std::log(D), w)};
  };

  ReductionReport rep;
  rep.tol = tol;
  std::vector<double> checkpoints;
  for (double v = 1; v < loglog_max; v *= 2) checkpoints.push_back(v);
  checkpoints.push_back(loglog_max);
  for (double v : checkpoints) {
    const auto [alo, ahi] = evalA(v);
    const auto [blo, bhi] = evalB(v);
    rep.rows.push_back({v, alo, ahi, blo, bhi});
  }
  // growth while v runs over [V/2, V], upper end minus lower end
  const double V = loglog_max;
  rep.a_last_block = evalA(V).second - evalA(V / 2).first;
  rep.b_last_block = evalB(V).second - evalB(V / 2).first;
  rep.a_cauchy = rep.a_last_block < tol;
  rep.b_cauchy = rep.b_last_block < tol;
  rep.equivalent = rep.a_cauchy == rep.b_cauchy;
  return rep;
}

}  // namespace khintchine::measures
