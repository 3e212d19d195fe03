#include "khintchine/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "khintchine/errors.hpp"

namespace khintchine::windows {

namespace {

constexpr double kPi = std::numbers::pi;

// (cos a - cos b) / (2 pi^2 k^2 delta eps) for the window's breakpoints, in product form.
double cos_gap_ratio(double k, double delta, double eps, Side side) {
  const double inner = side == Side::upper ? delta : delta * (1.0 - eps);
  const double outer = side == Side::upper ? delta * (1.0 + eps) : delta;
  const double diff = 2.0 * std::sin(kPi * k * (inner + outer)) * std::sin(kPi * k * (outer - inner));
  return diff / (2.0 * kPi * kPi * k * k * delta * eps);
}

}  // namespace

void WindowSpec::validate() const {
  if (!(delta > 0.0 && delta < 0.25)) throw DomainError("window delta must lie in (0, 1/4)");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("window eps must lie in (0, 1]");
}

void WSpec::validate() const {
  if (q < 4) throw DomainError("W window needs q >= 4");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
  if (!(psi_q > 0.0 && psi_q <= 1.0)) throw DomainError("psi(q) must lie in (0, 1]");
}

double dist_to_int(double x) {
  const double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

int chi_eval(double x, double delta) { return dist_to_int(x) <= delta ? 1 : 0; }

double chi_pm_eval(double x, const WindowSpec& w) {
  const double d = dist_to_int(x);
  const double inner = w.side == Side::upper ? w.delta : w.delta * (1.0 - w.eps);
  const double outer = w.side == Side::upper ? w.delta * (1.0 + w.eps) : w.delta;
  if (d <= inner) return 1.0;
  if (d >= outer) return 0.0;
  return (outer - d) / (outer - inner);
}

double chi_hat(std::int64_t k, const WindowSpec& w) {
  w.validate();
  if (k == 0) return (w.side == Side::upper ? 2.0 + w.eps : 2.0 - w.eps) * w.delta;
  return cos_gap_ratio(static_cast<double>(k), w.delta, w.eps, w.side);
}

double W_eval(double x, const WSpec& w, Side side) {
  w.validate();
  const WindowSpec chi{w.psi_q / static_cast<double>(w.q), w.eps, side};
  const double qd = static_cast<double>(w.q);
  // Bumps reach at most 2/q from their centre, so five neighbours cover x.
  const double centre = std::floor(qd * (x - std::floor(x)) - w.gamma);
  double sum = 0.0;
  std::int64_t seen[6];
  int nseen = 0;
  for (int d = -2; d <= 3; ++d) {
    const auto qi = static_cast<std::int64_t>(w.q);
    std::int64_t p = (static_cast<std::int64_t>(centre) + d) % qi;
    if (p < 0) p += qi;
    if (std::find(seen, seen + nseen, p) != seen + nseen) continue;
    seen[nseen++] = p;
    sum += chi_pm_eval(x - (static_cast<double>(p) + w.gamma) / qd, chi);
  }
  return sum;
}

std::complex<double> W_hat_multiple(std::int64_t s, double gamma, double eps, double psi_q, Side side) {
  if (s == 0) return (side == Side::upper ? 2.0 + eps : 2.0 - eps) * psi_q;
  const double amp = cos_gap_ratio(static_cast<double>(s), psi_q, eps, side);
  // e^{-2 pi i s gamma}, with the phase reduced mod 1 first
  const double ph = static_cast<double>(s) * gamma;
  const double frac = ph - std::floor(ph);
  return std::polar(amp, -2.0 * kPi * frac);
}

std::complex<double> W_hat(std::int64_t k, const WSpec& w, Side side) {
  w.validate();
  const auto q = static_cast<std::int64_t>(w.q);
  if (k % q != 0) return 0.0;
  return W_hat_multiple(k / q, w.gamma, w.eps, w.psi_q, side);
}

double W_hat_bound(std::int64_t s, double eps, double psi_q) {
  const double a = (2.0 + eps) * psi_q;
  if (s == 0) return a;
  const double sd = static_cast<double>(s);
  return std::min(a, 1.0 / (kPi * kPi * sd * sd * psi_q * eps));
}

std::int64_t min_s_cap(double eps, double psi_q) {
  return static_cast<std::int64_t>(std::ceil(1.0 / (kPi * psi_q * std::sqrt(eps))));
}

AbsSum W_hat_abs_sum(const WSpec& w, Side side, std::int64_t s_cap) {
  w.validate();
  const std::int64_t need = min_s_cap(w.eps, w.psi_q);
  if (s_cap < need) {
    throw PreconditionError("W_hat_abs_sum: s_cap must be at least " + std::to_string(need));
  }
  AbsSum r;
  r.s_cap = s_cap;
  // |W_hat(sq)| is even in s; summed from the small end for accuracy.
  double acc = 0.0;
  for (std::int64_t s = s_cap; s >= 1; --s) acc += std::abs(cos_gap_ratio(static_cast<double>(s), w.psi_q, w.eps, side));
  r.partial = std::abs(W_hat_multiple(0, w.gamma, w.eps, w.psi_q, side)) + 2.0 * acc;
  // sum_{s > S} 1/s^2 < 1/S
  r.tail = 2.0 / (kPi * kPi * w.psi_q * w.eps * static_cast<double>(s_cap));
  r.total = r.partial + r.tail;
  return r;
}

std::vector<Interval> E_q_intervals(std::uint64_t q, double gamma, double psi_q) {
  if (q < 1) throw DomainError("E_q needs q >= 1");
  if (!(psi_q >= 0.0)) throw DomainError("psi must be >= 0");
  if (2.0 * psi_q >= 1.0) return {{0.0, 1.0}};
  const double qd = static_cast<double>(q);
  std::vector<Interval> out;
  // centres (p + gamma)/q for p = -1..q cover every piece meeting [0, 1]
  for (std::int64_t p = -1; p <= static_cast<std::int64_t>(q); ++p) {
    const double lo = std::max(0.0, (static_cast<double>(p) + gamma - psi_q) / qd);
    const double hi = std::min(1.0, (static_cast<double>(p) + gamma + psi_q) / qd);
    if (hi < lo) continue;
    if (!out.empty() && lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, hi);
    } else {
      out.push_back({lo, hi});
    }
  }
  return out;
}

double total_length(const std::vector<Interval>& iv) {
  double s = 0.0;
  for (const auto& i : iv) s += i.hi - i.lo;
  return s;
}

double intersection_length(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) s += hi - lo;
    (a[i].hi < b[j].hi ? i : j)++;
  }
  return s;
}

double lebesgue_intersection(std::uint64_t q, std::uint64_t q2, double gamma, double psi_q, double psi_q2) {
  return intersection_length(E_q_intervals(q, gamma, psi_q), E_q_intervals(q2, gamma, psi_q2));
}

}  // namespace khintchine::windows
