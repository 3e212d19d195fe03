#pragma once

#include <optional>

namespace khintchine::arith {

// sup_{x >= 1} (log2 x)^s / sqrt(x), clamped below by 1.
double C_s_constant(double s);

struct LogReal {
  double log_value = 0.0;       // natural log of the value
  std::optional<double> value;  // empty when the value overflows a double
};

// 18 (n+1)! n^{n+1} 32^{n+2} ln(2n).
LogReal bw_constant(int n);

}  // namespace khintchine::arith
