#include "khintchine/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "khintchine/bigint.hpp"
#include "khintchine/errors.hpp"

namespace khintchine::seq {

using arith::compare;
using arith::PrimeBasis;
using arith::PrimePower;

std::string to_string(SeqKind kind) {
  switch (kind) {
    case SeqKind::geometric: return "geometric";
    case SeqKind::smooth: return "smooth";
    case SeqKind::appendixC: return "appendixC";
    case SeqKind::perturbed: return "perturbed";
    case SeqKind::convergents: return "convergents";
    case SeqKind::custom: return "custom";
  }
  return "custom";
}

SeqKind parse_kind(const std::string& name) {
  for (auto k : {SeqKind::geometric, SeqKind::smooth, SeqKind::appendixC, SeqKind::perturbed, SeqKind::convergents,
                 SeqKind::custom}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown sequence kind '" + name + "'");
}

SeqRecord::SeqRecord(BasisPtr basis, std::vector<FactoredNat> terms, SeqKind kind, SeqMeta meta)
    : basis_(std::move(basis)), terms_(std::move(terms)), kind_(kind), meta_(std::move(meta)) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!(*terms_[i].basis() == *basis_)) throw ConfigError("sequence term " + std::to_string(i + 1) + " uses a foreign basis");
    if (i > 0 && compare(terms_[i - 1], terms_[i]) >= 0) {
      throw DomainError("sequence is not strictly increasing at index " + std::to_string(i + 1));
    }
  }
}

std::vector<double> SeqRecord::logs() const {
  std::vector<double> out(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) out[i] = terms_[i].log();
  return out;
}

std::vector<std::uint64_t> SeqRecord::to_u64(std::size_t n) const {
  if (n > terms_.size()) throw RangeError("requested prefix exceeds sequence length");
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!terms_[i].fits_machine()) {
      throw RangeError("term " + std::to_string(i + 1) + " exceeds the 63-bit cap; use a shorter prefix");
    }
    out[i] = terms_[i].to_u64();
  }
  return out;
}

SeqRecord SeqRecord::prefix(std::size_t n) const {
  n = std::min(n, terms_.size());
  return SeqRecord(basis_, std::vector<FactoredNat>(terms_.begin(), terms_.begin() + static_cast<std::ptrdiff_t>(n)),
                   kind_, meta_);
}

SeqRecord from_integers(std::span<const std::uint64_t> values, SeqKind kind) {
  std::set<std::uint64_t> primes;
  for (auto v : values) {
    if (v == 0) throw DomainError("sequence terms must be positive");
    for (auto& [p, e] : arith::factorize(v)) primes.insert(p);
  }
  if (primes.empty()) primes.insert(2);
  if (static_cast<double>(primes.size()) * static_cast<double>(values.size()) > 5e7) {
    throw ResourceError("union prime basis too large for exponent-vector storage");
  }
  auto basis = arith::make_basis(std::vector<std::uint64_t>(primes.begin(), primes.end()));
  std::vector<FactoredNat> terms;
  terms.reserve(values.size());
  for (auto v : values) terms.push_back(FactoredNat::from_u64(basis, v));
  return SeqRecord(basis, std::move(terms), kind);
}

SeqRecord gen_smooth(BasisPtr basis, SmoothLimit limit) {
  if (limit.count == 0 && !std::isfinite(limit.log_cap)) throw DomainError("gen_smooth needs a count or a log cap");
  if (!(limit.log_cap >= 0.0)) throw DomainError("gen_smooth: log cap must be >= 0");
  const std::size_t k = basis->k();
  std::vector<FactoredNat> out;
  out.push_back(FactoredNat::one(basis));
  std::vector<std::size_t> idx(k, 0);
  std::vector<FactoredNat> cand;
  cand.reserve(k);
  for (std::size_t i = 0; i < k; ++i) cand.push_back(out[0].times_basis_prime(i));
  while (limit.count == 0 || out.size() < limit.count) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (compare(cand[i], cand[best]) < 0) best = i;
    }
    if (cand[best].log() > limit.log_cap + 1e-12) break;
    out.push_back(cand[best]);
    const FactoredNat& next = out.back();
    // Advance every frontier that produced this value.
    for (std::size_t i = 0; i < k; ++i) {
      if (i != best && cand[i] == next) cand[i] = out[++idx[i]].times_basis_prime(i);
    }
    cand[best] = out[++idx[best]].times_basis_prime(best);
  }
  SeqMeta meta;
  meta.B = static_cast<double>(k);
  meta.C = std::log(2.0) / 2.0;
  meta.D = static_cast<int>(k);
  return SeqRecord(basis, std::move(out), SeqKind::smooth, meta);
}

SeqRecord gen_geometric(std::uint64_t q0, std::uint64_t ratio, std::size_t count) {
  if (q0 < 1) throw DomainError("gen_geometric: q0 must be positive");
  if (ratio < 2) throw DomainError("gen_geometric: ratio must be >= 2");
  if (count < 1) throw DomainError("gen_geometric: count must be >= 1");
  std::set<std::uint64_t> primes;
  for (auto& [p, e] : arith::factorize(q0)) primes.insert(p);
  for (auto& [p, e] : arith::factorize(ratio)) primes.insert(p);
  auto basis = arith::make_basis(std::vector<std::uint64_t>(primes.begin(), primes.end()));
  const FactoredNat r = FactoredNat::from_u64(basis, ratio);
  std::vector<FactoredNat> terms{FactoredNat::from_u64(basis, q0)};
  for (std::size_t n = 1; n < count; ++n) {
    std::vector<std::uint32_t> e(basis->k());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = terms.back().exponent(i) + r.exponent(i);
    terms.emplace_back(basis, std::move(e));
  }
  SeqMeta meta;
  meta.K = static_cast<double>(ratio);
  return SeqRecord(basis, std::move(terms), SeqKind::geometric, meta);
}

SeqRecord gen_footnote(std::size_t count) {
  if (count < 1 || count > 62) throw RangeError("footnote sequence supports 1..62 terms");
  std::vector<std::uint64_t> v;
  for (std::size_t n = 1; n <= count; ++n) v.push_back((std::uint64_t{1} << n) + (n % 2 == 0 ? 1 : 0));
  auto s = from_integers(v, SeqKind::custom);
  s.meta().K = 1.6;
  s.meta().notes.emplace_back("name", "footnote");
  return s;
}

SeqRecord convergent_denominators(std::span<const std::uint64_t> a) {
  if (a.empty()) throw DomainError("convergent_denominators: need at least one partial quotient");
  std::vector<std::uint64_t> q;
  unsigned __int128 prev = 1, cur = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) throw DomainError("partial quotients must be positive");
    const unsigned __int128 next = i == 0 ? a[0] : static_cast<unsigned __int128>(a[i]) * cur + prev;
    if (next > static_cast<unsigned __int128>(INT64_MAX)) {
      throw RangeError("convergent denominator q_" + std::to_string(i + 1) + " exceeds the 63-bit cap");
    }
    if (i > 0) prev = cur;
    cur = next;
    q.push_back(static_cast<std::uint64_t>(cur));
  }
  // a_1 = 1 gives q_1 = 1 = q_0; the record keeps q_1 only.
  auto s = from_integers(q, SeqKind::convergents);
  std::uint64_t amax = *std::max_element(a.begin(), a.end());
  s.meta().notes.emplace_back("max_partial_quotient", std::to_string(amax));
  return s;
}

SeqRecord drop_small(const SeqRecord& seq, std::uint64_t threshold) {
  const double lt = std::log(static_cast<double>(threshold));
  std::size_t i = 0;
  while (i < seq.size() &&
         (seq.terms()[i].log() < lt - 1e-9 ||
          (seq.terms()[i].log() <= lt + 1e-9 && seq.terms()[i].fits_machine() && seq.terms()[i].to_u64() <= threshold))) {
    ++i;
  }
  if (i == seq.size()) throw DomainError("drop_small removed every term");
  return SeqRecord(seq.basis(), std::vector<FactoredNat>(seq.terms().begin() + static_cast<std::ptrdiff_t>(i), seq.terms().end()),
                   seq.kind(), seq.meta());
}

double check_lacunary(const SeqRecord& seq) {
  if (seq.size() < 2) throw DomainError("check_lacunary needs at least two terms");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < seq.size(); ++i) best = std::min(best, seq.terms()[i].log() - seq.terms()[i - 1].log());
  return std::exp(best);
}

GrowthVerdict check_growth(const SeqRecord& seq, double B, double C) {
  if (seq.size() < 2) throw DomainError("check_growth needs at least two terms");
  if (!(B >= 1.0) || !(C > 0.0)) throw DomainError("check_growth needs B >= 1 and C > 0");
  GrowthVerdict v;
  for (std::size_t n = 2; n <= seq.size(); ++n) {
    if (!(seq.q(n).log() > C * std::pow(static_cast<double>(n), 1.0 / B))) {
      v.ok = false;
      v.first_violation = n;
      break;
    }
  }
  return v;
}

PropertyDReport check_property_D(const SeqRecord& seq, int D, double eps, std::size_t n0, double B, double C) {
  if (D < 1) throw DomainError("Property D needs D >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("Property D needs eps in (0, 1)");
  PropertyDReport r;
  r.growth_ok = seq.size() < 2 || check_growth(seq, B, C).ok;
  const double expo = (1.0 - eps) / (2.0 * D);
  auto witness = [&](std::size_t n, std::string why, std::uint64_t p) {
    ++r.violations;
    if (r.witnesses.size() < 32) r.witnesses.push_back({n, std::move(why), p});
  };
  for (std::size_t n = std::max<std::size_t>(n0, 1); n <= seq.size(); ++n) {
    const FactoredNat& q = seq.q(n);
    if (q.distinct_primes() > static_cast<std::size_t>(D)) witness(n, "too many prime divisors", 0);
    const double cap = q.log() > 0 ? std::pow(q.log(), expo) : 0.0;
    for (const auto& pp : q.prime_powers()) {
      if (std::log(static_cast<double>(pp.prime)) > cap) witness(n, "prime divisor too large", pp.prime);
    }
  }
  r.ok = r.growth_ok && r.violations == 0;
  return r;
}

PerturbResult perturb_smooth(const SeqRecord& base, std::span<const std::uint64_t> reservoir, std::size_t count) {
  const auto& basis = base.basis();
  const std::size_t k = basis->k();
  double recip = 0.0;
  for (std::size_t i = 0; i < reservoir.size(); ++i) {
    const std::uint64_t p = reservoir[i];
    if (!arith::is_prime(p) || basis->contains(p)) throw DomainError("reservoir entries must be primes outside the basis");
    if (i > 0 && p <= reservoir[i - 1]) throw DomainError("reservoir must be strictly increasing");
    recip += 1.0 / static_cast<double>(p);
  }
  if (recip > 1.0 + 1e-12) throw DomainError("reservoir reciprocal sum exceeds 1");
  for (const auto& q : base.terms()) {
    if (q.extra()) throw DomainError("perturb_smooth needs a basis-smooth base sequence");
  }

  std::vector<FactoredNat> terms = base.terms();
  PerturbResult res{base, 0, {}};
  if (count == 0 || base.empty()) return res;

  const std::uint64_t pmax_S = basis->prime(k - 1);
  const double power = 3.0 * static_cast<double>(k + 1);
  FactoredNat boundary = base.q(1);
  std::size_t r = 0, t_prev = 0;
  while (res.achieved < count) {
    // next admissible reservoir prime
    std::optional<std::uint64_t> p;
    for (; r < reservoir.size(); ++r) {
      const std::uint64_t cand = reservoir[r];
      if (cand <= pmax_S) continue;
      const FactoredNat pc(basis, std::vector<std::uint32_t>(k, 0), PrimePower{cand, 1});
      if (compare(pc, boundary) > 0) {
        p = cand;
        ++r;
        break;
      }
    }
    if (!p) break;
    const double need = std::pow(std::log(static_cast<double>(*p)), power);
    std::size_t s = 0;
    for (std::size_t i = 1; i <= base.size(); ++i) {
      if (std::log(static_cast<double>(*p)) <= std::pow(base.q(i).log(), 1.0 / power) && base.q(i).log() >= need * (1 - 1e-12)) {
        s = i;
        break;
      }
    }
    if (s == 0) break;
    const FactoredNat cand = base.q(s).times_extra(PrimePower{*p, 1});
    // unique t with q_t < cand < q_{t+1}
    auto it = std::lower_bound(base.terms().begin(), base.terms().end(), cand,
                               [](const FactoredNat& a, const FactoredNat& b) { return compare(a, b) < 0; });
    const std::size_t t = static_cast<std::size_t>(it - base.terms().begin());  // q_t is the last term below
    if (t == 0 || t >= base.size() || t <= t_prev) break;
    terms[t - 1] = cand;
    res.replacements.push_back({t, s, *p});
    ++res.achieved;
    t_prev = t;
    boundary = base.q(t + 1);
  }
  SeqMeta meta = base.meta();
  meta.D = static_cast<int>(k + 1);
  meta.notes.emplace_back("replacements", std::to_string(res.achieved));
  for (const auto& rep : res.replacements) {
    meta.notes.emplace_back("replace", std::to_string(rep.index) + ":" + std::to_string(rep.s) + "*" + std::to_string(rep.prime));
  }
  res.seq = SeqRecord(basis, std::move(terms), SeqKind::perturbed, meta);
  return res;
}

}  // namespace khintchine::seq
