#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "oracles/oracles.hpp"

namespace oracle {

namespace {

using Float = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<1536, boost::multiprecision::digit_base_2>>;

Float dist(const Float& v) {
  Float f = v - floor(v);
  return f > 0.5 ? 1 - f : f;
}

}  // namespace

std::size_t count_float(const Big& X, const Big& G, unsigned P, const std::vector<Big>& q,
                        const std::vector<double>& psi) {
  const Float scale = ldexp(Float(1), -static_cast<int>(P));
  const Float x = Float(X) * scale, g = Float(G) * scale;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (dist(Float(q[i]) * x - g) <= Float(psi[i])) ++hits;
  return hits;
}

long double error_naive(const std::vector<std::uint64_t>& q, const std::vector<double>& psi) {
  long double total = 0;
  for (std::size_t n = 0; n < q.size(); ++n)
    for (std::size_t m = 0; m < n; ++m) {
      const long double g = static_cast<long double>(std::gcd(q[m], q[n]));
      total += g * std::min(psi[m] / static_cast<long double>(q[m]), psi[n] / static_cast<long double>(q[n]));
    }
  return total;
}

double star_naive(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (double t : xs) {
    double below = 0, upto = 0;
    for (double x : xs) {
      below += x < t;
      upto += x <= t;
    }
    d = std::max({d, std::abs(below / n - t), std::abs(upto / n - t)});
  }
  return d;
}

std::uint64_t littlewood_golden_naive(const Big& Y, const Big& G, unsigned P, std::uint64_t N) {
  const Float x = (sqrt(Float(5)) - 1) / 2;
  const Float scale = ldexp(Float(1), -static_cast<int>(P));
  const Float y = Float(Y) * scale, g = Float(G) * scale;
  std::uint64_t count = 0;
  for (std::uint64_t q = 2; q <= N; ++q) {
    const Float v = Float(q) * dist(Float(q) * x) * dist(Float(q) * y - g);
    if (v <= 1 / log(Float(q))) ++count;
  }
  return count;
}

}  // namespace oracle
