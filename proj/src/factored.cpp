#include "khintchine/factored.hpp"

#include <algorithm>
#include <cmath>

#include "khintchine/bigint.hpp"
#include "khintchine/errors.hpp"

namespace khintchine::arith {

namespace {

void require_same_basis(const FactoredNat& a, const FactoredNat& b) {
  if (a.basis() != b.basis() && !(*a.basis() == *b.basis())) {
    throw ConfigError("factored integers over different bases: " + a.basis()->to_string() + " vs " +
                      b.basis()->to_string());
  }
}

BigInt prime_power(std::uint64_t p, std::uint32_t e) {
  BigInt r = 1;
  BigInt base = p;
  while (e) {
    if (e & 1) r *= base;
    e >>= 1;
    if (e) base *= base;
  }
  return r;
}

}  // namespace

FactoredNat::FactoredNat(BasisPtr basis, std::vector<std::uint32_t> exponents, std::optional<PrimePower> extra)
    : basis_(std::move(basis)), exps_(std::move(exponents)), extra_(extra) {
  if (!basis_) throw ConfigError("FactoredNat: null basis");
  if (exps_.size() != basis_->k()) {
    throw ConfigError("FactoredNat: exponent vector length does not match basis size");
  }
  if (extra_) {
    if (extra_->exponent == 0) {
      extra_.reset();
    } else if (basis_->contains(extra_->prime) || !is_prime(extra_->prime)) {
      throw DomainError("FactoredNat: extra factor must be a prime outside the basis");
    }
  }
  recompute_log();
}

FactoredNat FactoredNat::one(BasisPtr basis) {
  const std::size_t k = basis->k();
  return FactoredNat(std::move(basis), std::vector<std::uint32_t>(k, 0));
}

FactoredNat FactoredNat::from_u64(BasisPtr basis, std::uint64_t n) {
  if (n == 0) throw DomainError("FactoredNat::from_u64: zero is not a positive integer");
  std::vector<std::uint32_t> exps(basis->k(), 0);
  for (std::size_t i = 0; i < basis->k(); ++i) {
    const std::uint64_t p = basis->prime(i);
    while (n % p == 0) {
      n /= p;
      ++exps[i];
    }
  }
  std::optional<PrimePower> extra;
  if (n > 1) {
    auto f = factorize(n);
    if (f.size() != 1) {
      throw DomainError("FactoredNat::from_u64: cofactor " + std::to_string(n) +
                        " has more than one prime outside the basis");
    }
    extra = PrimePower{f[0].first, f[0].second};
  }
  return FactoredNat(std::move(basis), std::move(exps), extra);
}

void FactoredNat::recompute_log() {
  // Kahan-compensated sum keeps the relative error near machine epsilon.
  double sum = 0.0, c = 0.0;
  auto add = [&](double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  };
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (exps_[i]) add(static_cast<double>(exps_[i]) * basis_->log_prime(i));
  }
  if (extra_) add(static_cast<double>(extra_->exponent) * std::log(static_cast<double>(extra_->prime)));
  log_ = sum;
}

std::uint32_t FactoredNat::two_adic() const noexcept {
  const std::size_t i = basis_->index_of(2);
  return i < exps_.size() ? exps_[i] : 0;
}

std::size_t FactoredNat::distinct_primes() const noexcept {
  std::size_t n = extra_ ? 1 : 0;
  for (auto e : exps_) n += e > 0;
  return n;
}

std::vector<PrimePower> FactoredNat::prime_powers() const {
  std::vector<PrimePower> out;
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (exps_[i]) out.push_back({basis_->prime(i), exps_[i]});
  }
  if (extra_) {
    out.push_back(*extra_);
    std::sort(out.begin(), out.end(), [](const PrimePower& x, const PrimePower& y) { return x.prime < y.prime; });
  }
  return out;
}

bool FactoredNat::fits_machine() const noexcept {
  constexpr double kCap = 63.0 * 0.69314718055994530942;
  if (log_ < kCap - 1e-6) return true;
  if (log_ > kCap + 1e-6) return false;
  return to_bigint(*this) <= BigInt(INT64_MAX);
}

std::uint64_t FactoredNat::to_u64() const {
  if (!fits_machine()) throw RangeError("factored integer exceeds the 63-bit machine cap: " + to_decimal());
  std::uint64_t v = 1;
  for (const auto& pp : prime_powers()) {
    for (std::uint32_t e = 0; e < pp.exponent; ++e) v *= pp.prime;
  }
  return v;
}

std::string FactoredNat::to_decimal() const { return to_bigint(*this).str(); }

FactoredNat FactoredNat::times_basis_prime(std::size_t i, std::uint32_t count) const {
  FactoredNat r = *this;
  r.exps_.at(i) += count;
  r.recompute_log();
  return r;
}

FactoredNat FactoredNat::times_extra(PrimePower pp) const {
  if (pp.exponent == 0) return *this;
  if (extra_ && extra_->prime != pp.prime) {
    throw DomainError("FactoredNat: at most one prime outside the basis is supported");
  }
  std::optional<PrimePower> e = extra_ ? PrimePower{pp.prime, extra_->exponent + pp.exponent} : pp;
  return FactoredNat(basis_, exps_, e);
}

BigInt to_bigint(const FactoredNat& n) {
  BigInt r = 1;
  for (const auto& pp : n.prime_powers()) r *= prime_power(pp.prime, pp.exponent);
  return r;
}

std::strong_ordering compare(const FactoredNat& a, const FactoredNat& b) {
  require_same_basis(a, b);
  const double la = a.log(), lb = b.log();
  const double scale = std::max({1.0, std::abs(la), std::abs(lb)});
  if (la - lb > 1e-9 * scale) return std::strong_ordering::greater;
  if (lb - la > 1e-9 * scale) return std::strong_ordering::less;
  if (a.exponents() == b.exponents() && a.extra() == b.extra()) return std::strong_ordering::equal;
  // Cancel the common divisor; the cofactors have much smaller logarithms.
  const FactoredNat g = gcd(a, b);
  std::vector<PrimePower> xs, ys;
  for (std::size_t i = 0; i < a.exponents().size(); ++i) {
    const std::uint32_t ea = a.exponent(i) - g.exponent(i);
    const std::uint32_t eb = b.exponent(i) - g.exponent(i);
    if (ea) xs.push_back({a.basis()->prime(i), ea});
    if (eb) ys.push_back({a.basis()->prime(i), eb});
  }
  const std::uint32_t ge = g.extra() ? g.extra()->exponent : 0;
  if (a.extra() && a.extra()->exponent > ge) xs.push_back({a.extra()->prime, a.extra()->exponent - ge});
  if (b.extra() && b.extra()->exponent > ge) ys.push_back({b.extra()->prime, b.extra()->exponent - ge});
  auto log_of = [](const std::vector<PrimePower>& v) {
    double s = 0.0;
    for (const auto& pp : v) s += pp.exponent * std::log(static_cast<double>(pp.prime));
    return s;
  };
  const double lx = log_of(xs), ly = log_of(ys);
  const double rscale = std::max({1.0, lx, ly});
  if (lx - ly > 1e-11 * rscale) return std::strong_ordering::greater;
  if (ly - lx > 1e-11 * rscale) return std::strong_ordering::less;
  BigInt x = 1, y = 1;
  for (const auto& pp : xs) x *= prime_power(pp.prime, pp.exponent);
  for (const auto& pp : ys) y *= prime_power(pp.prime, pp.exponent);
  const int c = x.compare(y);
  return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

bool divides(const FactoredNat& a, const FactoredNat& b) {
  require_same_basis(a, b);
  for (std::size_t i = 0; i < a.exponents().size(); ++i) {
    if (a.exponent(i) > b.exponent(i)) return false;
  }
  if (!a.extra()) return true;
  return b.extra() && b.extra()->prime == a.extra()->prime && a.extra()->exponent <= b.extra()->exponent;
}

FactoredNat gcd(const FactoredNat& a, const FactoredNat& b) {
  require_same_basis(a, b);
  std::vector<std::uint32_t> e(a.exponents().size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::min(a.exponent(i), b.exponent(i));
  std::optional<PrimePower> extra;
  if (a.extra() && b.extra() && a.extra()->prime == b.extra()->prime) {
    extra = PrimePower{a.extra()->prime, std::min(a.extra()->exponent, b.extra()->exponent)};
  }
  return FactoredNat(a.basis(), std::move(e), extra);
}

double gcd_ratio_log(const FactoredNat& a, const FactoredNat& b) {
  require_same_basis(a, b);
  // ln(gcd/b) = sum_i (min(a_i,b_i) - b_i) ln p_i, a sum of nonpositive terms.
  double s = 0.0;
  const auto& lp = b.basis()->logs();
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const std::uint32_t ea = a.exponent(i), eb = b.exponent(i);
    if (ea < eb) s -= static_cast<double>(eb - ea) * lp[i];
  }
  if (b.extra()) {
    std::uint32_t shared = 0;
    if (a.extra() && a.extra()->prime == b.extra()->prime) shared = std::min(a.extra()->exponent, b.extra()->exponent);
    s -= static_cast<double>(b.extra()->exponent - shared) * std::log(static_cast<double>(b.extra()->prime));
  }
  return s;
}

std::uint64_t mod_u64(const FactoredNat& a, std::uint64_t m) {
  if (m == 0) throw DomainError("mod_u64: modulus 0");
  using u128 = unsigned __int128;
  auto pow_mod = [m](std::uint64_t b, std::uint64_t e) {
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
      if (e & 1) r = static_cast<std::uint64_t>(static_cast<u128>(r) * b % m);
      b = static_cast<std::uint64_t>(static_cast<u128>(b) * b % m);
      e >>= 1;
    }
    return r;
  };
  std::uint64_t r = 1 % m;
  for (const auto& pp : a.prime_powers())
    r = static_cast<std::uint64_t>(static_cast<u128>(r) * pow_mod(pp.prime, pp.exponent) % m);
  return r;
}

}  // namespace khintchine::arith
