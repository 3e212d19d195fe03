#include <algorithm>
#include <cmath>
#include <numeric>

#include "khintchine/bigint.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/sequence.hpp"

namespace khintchine::seq {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

struct Rational {
  std::uint64_t num = 0, den = 0;  // den == 0: no small-denominator match
};

Rational small_rational(double alpha) {
  for (std::uint64_t den = 1; den <= 1000; ++den) {
    const double num = std::round(alpha * static_cast<double>(den));
    if (std::abs(num / static_cast<double>(den) - alpha) < 1e-15) return {static_cast<std::uint64_t>(num), den};
  }
  return {};
}

// v < q^alpha, decided exactly when alpha is a small-denominator rational.
bool below_power(u128 v, std::uint64_t q, double alpha, const Rational& ra) {
  const double lhs = std::log(static_cast<double>(v));
  const double rhs = alpha * std::log(static_cast<double>(q));
  const double tol = 1e-11 * std::max(1.0, std::abs(rhs));
  if (lhs < rhs - tol) return true;
  if (lhs > rhs + tol) return false;
  if (ra.den == 0) return lhs < rhs;
  arith::BigInt a = 1, b = 1;
  const arith::BigInt bv = arith::BigInt(static_cast<std::uint64_t>(v >> 64)) << 64 | static_cast<std::uint64_t>(v);
  for (std::uint64_t i = 0; i < ra.den; ++i) a *= bv;
  for (std::uint64_t i = 0; i < ra.num; ++i) b *= q;
  return a < b;
}

// Inverse of a modulo b for coprime a, b >= 2.
u128 mod_inverse(u128 a, u128 b) {
  i128 t = 0, new_t = 1;
  i128 r = static_cast<i128>(b), new_r = static_cast<i128>(a % b);
  while (new_r != 0) {
    const i128 q = r / new_r;
    std::tie(t, new_t) = std::pair<i128, i128>{new_t, t - q * new_t};
    std::tie(r, new_r) = std::pair<i128, i128>{new_r, r - q * new_r};
  }
  if (t < 0) t += static_cast<i128>(b);
  return static_cast<u128>(t);
}

u128 mulmod(u128 x, u128 y, u128 m) {
  // Operands stay below 2^64 here, so the product fits.
  return (x % m) * (y % m) % m;
}

u128 pow12(std::size_t m) {
  u128 r = 1;
  const u128 cap = static_cast<u128>(1) << 126;
  for (int i = 0; i < 12; ++i) {
    r *= m;
    if (r > cap) return cap;
  }
  return r;
}

}  // namespace

AlphaReport check_alpha_separated(const SeqRecord& seq, double alpha, std::size_t pair_limit) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  pair_limit = std::min(pair_limit, seq.size());
  const std::vector<std::uint64_t> q = seq.to_u64(pair_limit);
  const Rational ra = small_rational(alpha);
  AlphaReport rep;
  for (std::size_t m = 1; m <= pair_limit; ++m) {
    const u128 smax = pow12(m);
    const std::uint64_t qm = q[m - 1];
    for (std::size_t n = m + 1; n <= pair_limit; ++n) {
      const std::uint64_t qn = q[n - 1];
      const std::uint64_t g = std::gcd(qm, qn);
      const u128 a = qm / g, b = qn / g;
      const u128 ainv = mod_inverse(a, b);
      for (std::uint64_t c = 1; below_power(static_cast<u128>(c) * g, qm, alpha, ra); ++c) {
        for (int sign : {1, -1}) {
          // s a - t b = sign * c
          const u128 cm = c % b;
          const u128 target = sign > 0 ? cm : (b - cm) % b;
          u128 s0 = mulmod(target, ainv, b);
          if (s0 == 0) s0 = b;
          // t >= 1
          u128 lower = 1;
          if (sign > 0) {
            lower = (b + c + a - 1) / a;
          } else if (b > c) {
            lower = (b - c + a - 1) / a;
          }
          u128 s_first = s0;
          if (s_first < lower) s_first += (lower - s_first + b - 1) / b * b;
          if (s_first > smax) continue;
          ViolationClass vc;
          vc.m = m;
          vc.n = n;
          vc.c = c;
          vc.sign = sign;
          vc.s_first = static_cast<std::uint64_t>(s_first);
          vc.s_step = static_cast<std::uint64_t>(b);
          const i128 num = static_cast<i128>(s_first * a) - sign * static_cast<i128>(c);
          vc.t_first = static_cast<std::uint64_t>(num / static_cast<i128>(b));
          vc.t_step = static_cast<std::uint64_t>(a);
          vc.count = (smax - s_first) / b + 1;
          rep.total += vc.count;
          rep.m0 = std::max(rep.m0, m);
          rep.classes.push_back(vc);
        }
      }
    }
  }
  return rep;
}

std::vector<Violation> AlphaReport::expand(std::uint64_t s_max) const {
  std::vector<Violation> out;
  for (const auto& vc : classes) {
    u128 s = vc.s_first, t = vc.t_first;
    for (u128 i = 0; i < vc.count && s <= s_max; ++i, s += vc.s_step, t += vc.t_step) {
      out.push_back({vc.m, vc.n, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(t)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace khintchine::seq
