#include "khintchine/primes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "khintchine/errors.hpp"

namespace khintchine::arith {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) noexcept {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t isqrt(std::uint64_t n) noexcept {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::uint64_t pollard_rho(std::uint64_t n) {
  if (n % 2 == 0) return 2;
  for (std::uint64_t c = 1;; ++c) {
    auto f = [&](std::uint64_t x) { return (mul_mod(x, x, n) + c) % n; };
    std::uint64_t x = 2, y = 2, d = 1;
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != n) return d;
  }
}

void factor_rec(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const std::uint64_t d = pollard_rho(n);
  factor_rec(d, out);
  factor_rec(n / d, out);
}

}  // namespace

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  if (hi < 2 || lo > hi) return out;
  PrimeStream stream(lo, hi);
  std::uint64_t p;
  while (stream.next(p)) out.push_back(p);
  return out;
}

std::vector<std::pair<std::uint64_t, std::uint32_t>> factorize(std::uint64_t n) {
  if (n == 0) throw DomainError("factorize: 0 has no factorization");
  std::vector<std::uint64_t> flat;
  for (std::uint64_t p = 2; p < 1000 && p * p <= n; ++p) {
    while (n % p == 0) {
      flat.push_back(p);
      n /= p;
    }
  }
  factor_rec(n, flat);
  std::sort(flat.begin(), flat.end());
  std::vector<std::pair<std::uint64_t, std::uint32_t>> out;
  for (std::uint64_t p : flat) {
    if (!out.empty() && out.back().first == p) {
      ++out.back().second;
    } else {
      out.emplace_back(p, 1);
    }
  }
  return out;
}

PrimeStream::PrimeStream(std::uint64_t lo, std::uint64_t hi, std::size_t segment_bytes)
    : lo_(std::max<std::uint64_t>(lo, 2)), hi_(hi), seg_len_(std::max<std::size_t>(segment_bytes, 64)) {
  if (hi_ < lo_) {
    done_ = true;
    return;
  }
  emit_two_ = lo_ <= 2;
  const std::uint64_t root = isqrt(hi_);
  // Small odd primes up to sqrt(hi) by a plain sieve.
  std::vector<std::uint8_t> small(root + 1, 1);
  for (std::uint64_t i = 3; i * i <= root; i += 2) {
    if (small[i]) {
      for (std::uint64_t j = i * i; j <= root; j += 2 * i) small[j] = 0;
    }
  }
  for (std::uint64_t i = 3; i <= root; i += 2) {
    if (small[i]) base_.push_back(static_cast<std::uint32_t>(i));
  }
  seg_lo_ = std::max<std::uint64_t>(lo_, 3) | 1;
  composite_.resize(seg_len_);
  fill_segment();
}

void PrimeStream::fill_segment() {
  if (seg_lo_ > hi_) {
    filled_ = 0;
    pos_ = 0;
    return;
  }
  const std::uint64_t remaining = (hi_ - seg_lo_) / 2 + 1;
  filled_ = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, seg_len_));
  std::fill(composite_.begin(), composite_.begin() + static_cast<std::ptrdiff_t>(filled_), 0);
  const std::uint64_t seg_hi = seg_lo_ + 2 * (filled_ - 1);
  for (std::uint32_t p32 : base_) {
    const std::uint64_t p = p32;
    if (p * p > seg_hi) break;
    std::uint64_t start = std::max(p * p, (seg_lo_ + p - 1) / p * p);
    if (start % 2 == 0) start += p;
    for (std::uint64_t j = (start - seg_lo_) / 2; j < filled_; j += p) composite_[j] = 1;
  }
  if (seg_lo_ == 1) composite_[0] = 1;
  pos_ = 0;
}

bool PrimeStream::next(std::uint64_t& p) {
  if (done_) return false;
  if (emit_two_) {
    emit_two_ = false;
    p = 2;
    return true;
  }
  while (true) {
    while (pos_ < filled_) {
      const std::size_t i = pos_++;
      if (!composite_[i]) {
        p = seg_lo_ + 2 * i;
        return true;
      }
    }
    if (filled_ == 0) {
      done_ = true;
      return false;
    }
    seg_lo_ += 2 * filled_;
    fill_segment();
  }
}

PrimeBasis::PrimeBasis(std::vector<std::uint64_t> primes) : primes_(std::move(primes)) {
  if (primes_.empty()) throw DomainError("PrimeBasis: at least one prime is required");
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    if (!is_prime(primes_[i])) {
      throw DomainError("PrimeBasis: " + std::to_string(primes_[i]) + " is not prime");
    }
    if (i > 0 && primes_[i] <= primes_[i - 1]) {
      throw DomainError("PrimeBasis: primes must be strictly increasing");
    }
    logs_.push_back(std::log(static_cast<double>(primes_[i])));
  }
}

std::size_t PrimeBasis::index_of(std::uint64_t p) const noexcept {
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it != primes_.end() && *it == p) return static_cast<std::size_t>(it - primes_.begin());
  return primes_.size();
}

std::string PrimeBasis::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < primes_.size(); ++i) os << (i ? "," : "") << primes_[i];
  os << '}';
  return os.str();
}

}  // namespace khintchine::arith
