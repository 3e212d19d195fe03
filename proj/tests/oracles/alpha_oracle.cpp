#include <algorithm>
#include <numeric>

#include "oracles/oracles.hpp"

namespace oracle {

NaiveAlpha alpha_naive(const std::vector<std::uint64_t>& q, std::uint64_t num, std::uint64_t den) {
  NaiveAlpha out;
  out.window = UINT64_MAX;
  const std::size_t L = q.size();
  for (std::size_t m = 1; m <= L; ++m) {
    Big smax = 1;
    for (int i = 0; i < 12; ++i) smax *= m;
    const Big qm_pow = big_pow(q[m - 1], static_cast<unsigned>(num));
    for (std::size_t n = m + 1; n <= L; ++n) {
      const std::uint64_t qm = q[m - 1], qn = q[n - 1];
      const std::uint64_t b = qn / std::gcd(qm, qn);
      // past this s the condition t >= 1 never binds, and one more period follows
      const std::uint64_t w = (qn + qm) / qm + 2 * b + 2;
      const std::uint64_t limit = smax < Big(w) ? static_cast<std::uint64_t>(smax) : w;
      out.window = std::min(out.window, limit);
      for (std::uint64_t s = 1; s <= limit; ++s) {
        const Big sq = Big(s) * qm;
        const Big t0 = sq / qn;
        for (Big t = t0; t <= t0 + 1; ++t) {
          if (t < 1) continue;
          Big d = sq - t * qn;
          if (d < 0) d = -d;
          if (d < 1) continue;
          Big dp = 1;
          for (std::uint64_t i = 0; i < den; ++i) dp *= d;
          if (dp >= qm_pow) continue;
          out.listed.push_back({m, n, s, static_cast<std::uint64_t>(t)});
          out.total += 1;
          // each later s in the same class shifts by one period
          if (limit == w && s + b > limit) {
            out.total += static_cast<long double>((smax - s) / b);
          }
        }
      }
    }
  }
  std::sort(out.listed.begin(), out.listed.end());
  return out;
}

}  // namespace oracle
