#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace khintchine::windows {

enum class Side { upper, lower };

struct WindowSpec {
  double delta = 0.1;  // 0 < delta < 1/4
  double eps = 1.0;    // 0 < eps <= 1
  Side side = Side::upper;
  void validate() const;
};

struct WSpec {
  std::uint64_t q = 4;  // q >= 4
  double gamma = 0.0;   // [0, 1]
  double eps = 1.0;     // (0, 1]
  double psi_q = 0.25;  // (0, 1]
  void validate() const;
};

// Distance to the nearest integer.
double dist_to_int(double x);

int chi_eval(double x, double delta);
double chi_pm_eval(double x, const WindowSpec& w);
double chi_hat(std::int64_t k, const WindowSpec& w);

// Sum over p of chi^{+-}(x - (p + gamma)/q) with delta = psi(q)/q.
double W_eval(double x, const WSpec& w, Side side);
std::complex<double> W_hat(std::int64_t k, const WSpec& w, Side side);
// Coefficient at k = s q; independent of q.
std::complex<double> W_hat_multiple(std::int64_t s, double gamma, double eps, double psi_q, Side side);

// The two bounds (2+eps) psi and 1/(pi^2 s^2 psi eps).
double W_hat_bound(std::int64_t s, double eps, double psi_q);

struct AbsSum {
  double partial = 0.0;  // sum over |s| <= s_cap
  double tail = 0.0;     // analytic bound for |s| > s_cap
  double total = 0.0;
  std::int64_t s_cap = 0;
};
std::int64_t min_s_cap(double eps, double psi_q);
AbsSum W_hat_abs_sum(const WSpec& w, Side side, std::int64_t s_cap);

struct Interval {
  double lo, hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// {x in [0,1] : ||q x - gamma|| <= psi}, as sorted disjoint closed intervals.
std::vector<Interval> E_q_intervals(std::uint64_t q, double gamma, double psi_q);
double total_length(const std::vector<Interval>& iv);
double intersection_length(const std::vector<Interval>& a, const std::vector<Interval>& b);
double lebesgue_intersection(std::uint64_t q, std::uint64_t q2, double gamma, double psi_q, double psi_q2);

}  // namespace khintchine::windows
