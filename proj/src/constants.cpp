#include "khintchine/constants.hpp"

#include <cmath>
#include <numbers>

#include "khintchine/bigint.hpp"
#include "khintchine/errors.hpp"

namespace khintchine::arith {

double C_s_constant(double s) {
  if (!(s >= 0.0)) throw DomainError("C_s_constant: s must be >= 0");
  if (s == 0.0) return 1.0;
  const double peak = std::pow(2.0 * s / (std::numbers::e * std::numbers::ln2), s);
  return std::max(1.0, peak);
}

LogReal bw_constant(int n) {
  if (n < 1) throw DomainError("bw_constant: n must be >= 1");
  BigInt v = 18;
  for (int i = 2; i <= n + 1; ++i) v *= i;
  for (int i = 0; i < n + 1; ++i) v *= n;
  v <<= 5 * (n + 2);
  const double ll = std::log(std::log(2.0 * n));
  // ln of a big integer: scale by its bit length to stay in double range.
  const std::size_t bits = boost::multiprecision::msb(v) + 1;
  const std::size_t shift = bits > 60 ? bits - 60 : 0;
  const double head = static_cast<double>(static_cast<std::uint64_t>(v >> shift));
  LogReal r;
  r.log_value = std::log(head) + static_cast<double>(shift) * std::numbers::ln2 + ll;
  if (r.log_value < 709.0) r.value = std::exp(r.log_value);
  return r;
}

}  // namespace khintchine::arith
