#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace khintchine::arith {

// Deterministic Miller-Rabin for the full 64-bit range.
bool is_prime(std::uint64_t n) noexcept;

// All primes p with lo <= p <= hi, increasing (sieve of Eratosthenes).
std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi);

// Prime factorization of a 64-bit integer as (prime, exponent) pairs in
// increasing prime order. n = 1 yields an empty list.
std::vector<std::pair<std::uint64_t, std::uint32_t>> factorize(std::uint64_t n);

// Streams the primes of [lo, hi] in increasing order using a segmented
// odd-only sieve. Memory is O(sqrt(hi) + segment).
class PrimeStream {
 public:
  PrimeStream(std::uint64_t lo, std::uint64_t hi, std::size_t segment_bytes = 1u << 16);

  // Returns false once exhausted.
  bool next(std::uint64_t& p);

 private:
  void fill_segment();

  std::uint64_t lo_;
  std::uint64_t hi_;
  std::uint64_t seg_lo_;  // odd number represented by bit 0 of the segment
  std::size_t seg_len_;   // odd numbers per segment
  std::vector<std::uint32_t> base_;
  std::vector<std::uint8_t> composite_;
  std::size_t pos_ = 0;
  std::size_t filled_ = 0;
  bool emit_two_ = false;
  bool done_ = false;
};

// Ordered set of distinct primes S = {p_1 < ... < p_k}.
class PrimeBasis {
 public:
  explicit PrimeBasis(std::vector<std::uint64_t> primes);
  PrimeBasis(std::initializer_list<std::uint64_t> primes)
      : PrimeBasis(std::vector<std::uint64_t>(primes)) {}

  std::size_t k() const noexcept { return primes_.size(); }
  std::uint64_t prime(std::size_t i) const noexcept { return primes_[i]; }
  double log_prime(std::size_t i) const noexcept { return logs_[i]; }
  std::span<const std::uint64_t> primes() const noexcept { return primes_; }
  std::span<const double> logs() const noexcept { return logs_; }

  // Index of p in the basis, or k() if absent.
  std::size_t index_of(std::uint64_t p) const noexcept;
  bool contains(std::uint64_t p) const noexcept { return index_of(p) < k(); }

  std::string to_string() const;

  friend bool operator==(const PrimeBasis& a, const PrimeBasis& b) noexcept {
    return a.primes_ == b.primes_;
  }

 private:
  std::vector<std::uint64_t> primes_;
  std::vector<double> logs_;
};

using BasisPtr = std::shared_ptr<const PrimeBasis>;

inline BasisPtr make_basis(std::vector<std::uint64_t> primes) {
  return std::make_shared<const PrimeBasis>(std::move(primes));
}

}  // namespace khintchine::arith
