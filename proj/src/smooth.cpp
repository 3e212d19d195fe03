#include "khintchine/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "khintchine/bigint.hpp"
#include "khintchine/errors.hpp"

namespace khintchine::arith {

namespace {

using u128 = unsigned __int128;

std::uint64_t count_below(std::span<const std::uint64_t> primes, std::size_t i, u128 bound) {
  // Number of integers <= bound built from primes[i..].
  if (i == primes.size()) return 1;
  std::uint64_t total = 0;
  const std::uint64_t p = primes[i];
  for (u128 b = bound;; b /= p) {
    total += count_below(primes, i + 1, b);
    if (b < p) break;
  }
  return total;
}

std::uint64_t count_below_big(std::span<const std::uint64_t> primes, std::size_t i, const BigInt& bound) {
  if (i == primes.size()) return 1;
  std::uint64_t total = 0;
  const std::uint64_t p = primes[i];
  for (BigInt b = bound;; b /= p) {
    total += count_below_big(primes, i + 1, b);
    if (b < p) break;
  }
  return total;
}

}  // namespace

std::uint64_t pi_S(const PrimeBasis& basis, double X) {
  if (!(X >= 1.0)) throw DomainError("pi_S: X must be >= 1");
  if (!std::isfinite(X)) throw DomainError("pi_S: X must be finite");
  const double fl = std::floor(X);
  if (fl < 1.8e19) return count_below(basis.primes(), 0, static_cast<u128>(static_cast<std::uint64_t>(fl)));
  BigInt bound(fl);
  return count_below_big(basis.primes(), 0, bound);
}

double pi_S_bound(int k, double X) {
  if (k < 1) throw DomainError("pi_S_bound: k must be >= 1");
  if (!(X >= 2.0)) throw DomainError("pi_S_bound: X must be >= 2");
  return 2.0 / std::log(2.0) * std::pow(std::log(X), k);
}

std::vector<std::vector<std::uint32_t>> minimal_solutions(const PrimeBasis& basis, double K) {
  if (!(K >= 1.0) || !std::isfinite(K)) throw DomainError("minimal_solutions: K must be a finite real >= 1");
  if (K >= 1e18) throw RangeError("minimal_solutions: K too large for exact enumeration");
  // prod > K  iff  prod > floor(K) for integer products.
  const u128 k_floor = static_cast<u128>(std::floor(K));
  const auto& ps = basis.primes();
  const std::size_t k = ps.size();
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> a(k, 0);

  auto is_minimal = [&](u128 prod) {
    for (std::size_t i = 0; i < k; ++i) {
      if (a[i] > 0 && prod / ps[i] > k_floor) return false;
    }
    return true;
  };

  // Every minimal tuple has product <= floor(K) * p_max, so prefixes never exceed that.
  auto rec = [&](auto&& self, std::size_t i, u128 prod) -> void {
    if (i + 1 == k) {
      std::uint32_t e = 0;
      u128 v = prod;
      while (v <= k_floor) {
        v *= ps[i];
        ++e;
      }
      a[i] = e;
      if (is_minimal(v)) out.push_back(a);
      a[i] = 0;
      return;
    }
    for (u128 v = prod;;) {
      self(self, i + 1, v);
      if (v > k_floor) break;
      v *= ps[i];
      ++a[i];
    }
    a[i] = 0;
  };
  rec(rec, 0, 1);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace khintchine::arith
