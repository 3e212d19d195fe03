#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "khintchine/primes.hpp"

namespace khintchine::arith {

struct PrimePower {
  std::uint64_t prime = 0;
  std::uint32_t exponent = 0;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// Positive integer  prod_i p_i^{a_i} * p^e  over a declared prime basis with
// at most one extra prime p outside the basis. Immutable once built; the
// natural logarithm is cached with relative error well below 1e-12.
class FactoredNat {
 public:
  FactoredNat(BasisPtr basis, std::vector<std::uint32_t> exponents,
              std::optional<PrimePower> extra = std::nullopt);

  static FactoredNat one(BasisPtr basis);
  // Factors n over the basis; a leftover must be a power of a single prime
  // outside the basis, otherwise DomainError.
  static FactoredNat from_u64(BasisPtr basis, std::uint64_t n);

  const BasisPtr& basis() const noexcept { return basis_; }
  const std::vector<std::uint32_t>& exponents() const noexcept { return exps_; }
  std::uint32_t exponent(std::size_t i) const noexcept { return exps_[i]; }
  const std::optional<PrimePower>& extra() const noexcept { return extra_; }
  double log() const noexcept { return log_; }

  // Exponent of the prime 2 (0 when 2 is not a factor).
  std::uint32_t two_adic() const noexcept;
  // Number of distinct prime divisors.
  std::size_t distinct_primes() const noexcept;
  // (prime, exponent) pairs of all prime divisors, increasing prime order.
  std::vector<PrimePower> prime_powers() const;

  // True iff the value fits a signed 64-bit machine word.
  bool fits_machine() const noexcept;
  // Exact value; RangeError unless fits_machine().
  std::uint64_t to_u64() const;
  // Decimal representation of the exact value.
  std::string to_decimal() const;

  FactoredNat times_basis_prime(std::size_t i, std::uint32_t count = 1) const;
  FactoredNat times_extra(PrimePower pp) const;

  friend bool operator==(const FactoredNat& a, const FactoredNat& b) noexcept {
    return a.exps_ == b.exps_ && a.extra_ == b.extra_ && (a.basis_ == b.basis_ || *a.basis_ == *b.basis_);
  }

 private:
  void recompute_log();

  BasisPtr basis_;
  std::vector<std::uint32_t> exps_;
  std::optional<PrimePower> extra_;
  double log_ = 0.0;
};

// Exact three-way comparison of the represented integers. Log values decide
// unless they agree to within 1e-9 (relative), in which case the values are
// compared as exact big integers.
std::strong_ordering compare(const FactoredNat& a, const FactoredNat& b);

inline bool less(const FactoredNat& a, const FactoredNat& b) { return compare(a, b) < 0; }

// a | b.
bool divides(const FactoredNat& a, const FactoredNat& b);

FactoredNat gcd(const FactoredNat& a, const FactoredNat& b);

// ln gcd(a,b) - ln b, evaluated in exponent space.
double gcd_ratio_log(const FactoredNat& a, const FactoredNat& b);

// The represented integer reduced modulo m (m >= 1).
std::uint64_t mod_u64(const FactoredNat& a, std::uint64_t m);

}  // namespace khintchine::arith
