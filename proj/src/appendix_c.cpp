#include "khintchine/appendix_c.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "khintchine/errors.hpp"

namespace khintchine::seq {

namespace {

constexpr long double kLn2 = 0.693147180559945309417232121458176568L;

long double regular_gap(long double n) {
  // n^{1/5} - 2 ln n - 2 ln ln n
  return std::pow(n, 0.2L) - 2.0L * std::log(n) - 2.0L * std::log(std::log(n));
}

unsigned floor_log2(std::uint64_t p) { return 63u - static_cast<unsigned>(std::countl_zero(p)); }

// Sort key of p / 2^{u_p + 1}: shift p so its top bit lands on bit 63.
std::uint64_t mantissa_key(std::uint64_t p) { return p << (63u - floor_log2(p)); }

double psi_block(int t) { return t == 1 ? 1.0 : 1.0 / (t * std::log(static_cast<double>(t))); }

struct Element {
  std::uint64_t e;  // power of two
  std::uint64_t p;  // odd prime, or 1 for the pure power 2^{n_t}
  int t;
};

// (q_m, q_j) / q_j for q = 2^e p.
long double gcd_ratio(const Element& m, const Element& j) {
  const std::int64_t d = static_cast<std::int64_t>(std::min(m.e, j.e)) - static_cast<std::int64_t>(j.e);
  long double r = std::ldexp(1.0L, static_cast<int>(std::max<std::int64_t>(d, -20000)));
  if (j.p != 1 && m.p != j.p) r /= static_cast<long double>(j.p);
  return r;
}

long double log_q(const Element& x) { return x.e * kLn2 + std::log(static_cast<long double>(x.p)); }

bool divisor_bound_ok(const Element& x) {
  const long double cap = std::pow(log_q(x), 0.2L);
  if (x.e > 0 && !(kLn2 <= cap)) return false;
  return x.p == 1 || std::log(static_cast<long double>(x.p)) <= cap;
}

// Exact check of q_t/2 < 2^e p < q_t for a block element.
bool halves_ok(const Element& x, std::uint64_t n_t) {
  const unsigned u = floor_log2(x.p);
  return (x.p & 1) && x.p != (std::uint64_t{1} << u) && x.e + u + 1 == n_t;
}

void finish_ratios(ACVerifyReport& rep) {
  for (auto& b : rep.blocks) {
    b.row_ok = b.row_lower >= b.row_target;
    b.log_ratio = std::log(b.lhs) / b.psi_sum;
    rep.invariants_ok = rep.invariants_ok && b.halves_ok && b.growth_ok && b.row_ok;
    rep.divisor_ok = rep.divisor_ok && b.divisor_ok;
  }
  rep.invariants_ok = rep.invariants_ok && rep.order_ok;
}

}  // namespace

std::uint64_t strict_n1() {
  // The gap is increasing once n^{1/5} > 10 + 10 / ln n, which holds from 2^18 on.
  std::uint64_t lo = std::uint64_t{1} << 18, hi = std::uint64_t{1} << 40;
  if (regular_gap(static_cast<long double>(lo)) > 0) throw PreconditionError("strict_n1: unexpected sign at search start");
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (regular_gap(static_cast<long double>(mid)) > 0 ? hi : lo) = mid;
  }
  const long double need = std::exp(std::exp(2.0L * kLn2 + 1.0L));
  const std::uint64_t regular2 = static_cast<std::uint64_t>(std::floor(need)) + 1;
  return std::max(hi, regular2);
}

AppendixCPlan plan_appendixC(ACMode mode, int t_max, std::optional<std::uint64_t> demo_n1) {
  if (t_max < 1) throw DomainError("appendix C needs t_max >= 1");
  if (t_max > 40) throw RangeError("appendix C supports t_max <= 40");
  AppendixCPlan plan;
  plan.mode = mode;
  plan.t_max = t_max;
  if (mode == ACMode::strict) {
    plan.n1 = strict_n1();
  } else {
    plan.n1 = demo_n1.value_or(64);
    if (plan.n1 < 8) throw DomainError("demo n1 must be >= 8");
  }
  for (int t = 0; t < t_max; ++t) {
    const std::uint64_t n = plan.n1 << t;
    if (n >> t != plan.n1 || n > (std::uint64_t{1} << 40)) throw RangeError("block size overflow; lower t_max");
    plan.n.push_back(n);
    const long double cap = static_cast<long double>(n) * std::log(static_cast<long double>(n));
    plan.prime_cap.push_back(static_cast<std::uint64_t>(std::floor(cap)));
  }
  return plan;
}

std::uint64_t estimated_elements(const AppendixCPlan& plan) {
  std::uint64_t total = 0;
  for (auto cap : plan.prime_cap) {
    const double x = static_cast<double>(std::max<std::uint64_t>(cap, 17));
    const double lx = std::log(x);
    total += static_cast<std::uint64_t>(x / lx * (1.0 + 1.2762 / lx)) + 1;
  }
  return total;
}

AppendixCArtifact build_appendixC(const AppendixCPlan& plan, std::size_t memory_budget) {
  constexpr std::size_t kBytesPerElement = 128;
  const std::uint64_t est = estimated_elements(plan);
  if (static_cast<long double>(est) * kBytesPerElement > static_cast<long double>(memory_budget)) {
    throw ResourceError("appendix C materialization needs ~" + std::to_string(est) + " elements (" +
                        std::to_string(est * kBytesPerElement >> 20) + " MiB) over the " +
                        std::to_string(memory_budget >> 20) + " MiB budget; use streaming verification");
  }
  auto basis = arith::make_basis({2});
  std::vector<FactoredNat> terms;
  std::vector<double> log_psi;
  AppendixCArtifact art{SeqRecord(basis, {}, SeqKind::appendixC), ApproxFn::constant(1.0), {}, {}, {}, plan.n};
  for (int t = 1; t <= plan.t_max; ++t) {
    const std::uint64_t n = plan.n[t - 1];
    auto ps = arith::primes_in(3, plan.prime_cap[t - 1]);
    std::sort(ps.begin(), ps.end(), [](std::uint64_t a, std::uint64_t b) { return mantissa_key(a) < mantissa_key(b); });
    for (auto p : ps) {
      const std::uint64_t u = floor_log2(p);
      terms.emplace_back(basis, std::vector<std::uint32_t>{static_cast<std::uint32_t>(n - u - 1)}, arith::PrimePower{p, 1});
      const std::size_t j = terms.size();
      art.I1.push_back(j);
      art.t_of.push_back(t);
      log_psi.push_back(-static_cast<double>(j) * std::log(2.0));
    }
    terms.emplace_back(basis, std::vector<std::uint32_t>{static_cast<std::uint32_t>(n)});
    art.I2.push_back(terms.size());
    art.t_of.push_back(t);
    log_psi.push_back(std::log(psi_block(t)));
  }
  SeqMeta meta;
  meta.B = 1.0;
  meta.C = 0.25;
  meta.D = 2;
  meta.notes.emplace_back("n1", std::to_string(plan.n1));
  meta.notes.emplace_back("t_max", std::to_string(plan.t_max));
  meta.notes.emplace_back("mode", plan.mode == ACMode::strict ? "strict" : "demo");
  art.seq = SeqRecord(basis, std::move(terms), SeqKind::appendixC, meta);
  art.psi = ApproxFn::table(std::move(log_psi), "appendixC");
  return art;
}

ACVerifyReport verify_appendixC(const AppendixCArtifact& art) {
  ACVerifyReport rep;
  rep.plan.mode = ACMode::demo;
  rep.plan.n = art.n_t;
  rep.plan.t_max = static_cast<int>(art.n_t.size());
  rep.plan.n1 = art.n_t.empty() ? 0 : art.n_t[0];
  const std::size_t N = art.seq.size();
  std::vector<Element> el(N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto& q = art.seq.terms()[i];
    el[i] = {q.exponent(0), q.extra() ? q.extra()->prime : 1, art.t_of[i]};
    if (q.extra() && q.extra()->exponent != 1) rep.order_ok = false;
  }
  std::vector<long double> psi(N);
  for (std::size_t i = 0; i < N; ++i) psi[i] = std::exp(static_cast<long double>(art.psi.log_psi(i + 1, 0.0)));

  long double lhs = 0, lhs_off = 0, psum = 0;
  std::size_t block_start = 0;
  for (int t = 1; t <= rep.plan.t_max; ++t) {
    ACBlockReport b;
    b.t = t;
    b.n_t = art.n_t[t - 1];
    const std::size_t end = art.I2[t - 1];  // 1-based index of 2^{n_t}
    b.last_index = end;
    b.primes = end - block_start - 1;
    b.prime_cap = static_cast<std::uint64_t>(std::floor(static_cast<long double>(b.n_t) * std::log(static_cast<long double>(b.n_t))));
    unsigned __int128 dyadic = 0;  // numerator over 2^64 of the block part of the row
    for (std::size_t i = block_start; i < end; ++i) {
      const Element& x = el[i];
      const std::size_t j = i + 1;
      if (x.p != 1) {
        b.halves_ok = b.halves_ok && halves_ok(x, b.n_t);
        dyadic += static_cast<unsigned __int128>(1) << (63 - floor_log2(x.p));
      } else if (x.e != b.n_t || j != end) {
        rep.order_ok = false;
      }
      b.growth_ok = b.growth_ok && log_q(x) > static_cast<long double>(j) / 4;
      b.divisor_ok = b.divisor_ok && divisor_bound_ok(x);
      psum += psi[i];
      if (psi[i] < 1e-320L) continue;
      long double row = 0;
      for (std::size_t m = 0; m <= i; ++m) row += gcd_ratio(el[m], x);
      lhs += psi[i] * row;
      lhs_off += psi[i] * (row - 1);
      if (x.p == 1) b.row_value = static_cast<double>(row);
    }
    b.row_lower = static_cast<double>(1.0L + std::ldexp(static_cast<long double>(dyadic), -64));
    b.row_target = 0.25 * std::log(std::log(static_cast<double>(b.n_t)));
    b.psi_sum = static_cast<double>(psum);
    b.lhs = static_cast<double>(lhs);
    b.lhs_offdiag = static_cast<double>(lhs_off);
    rep.blocks.push_back(b);
    block_start = end;
  }
  rep.prefix_checked = N;
  finish_ratios(rep);
  return rep;
}

ACVerifyReport verify_appendixC(const AppendixCPlan& plan, std::size_t prefix) {
  ACVerifyReport rep;
  rep.plan = plan;
  const int T = plan.t_max;
  const std::uint64_t cap_max = plan.prime_cap.back();

  // One pass over the primes: per-(first block, u) counts and per-block extremes.
  std::vector<std::vector<std::uint64_t>> cnt(T, std::vector<std::uint64_t>(64, 0));
  std::vector<long double> min_mant(T, 0.0L);  // min over the block of ln p - (u+1) ln 2
  std::vector<bool> halves(T, true), divisor(T, true);
  {
    arith::PrimeStream ps(3, cap_max, std::size_t{1} << 18);
    std::uint64_t p;
    int t0 = 0;
    while (ps.next(p)) {
      while (p > plan.prime_cap[t0]) ++t0;
      const unsigned u = floor_log2(p);
      ++cnt[t0][u];
      const Element x{plan.n[t0] - u - 1, p, t0 + 1};
      if (!halves_ok(x, plan.n[t0])) halves[t0] = false;
      // ln q grows with t, so the smallest block containing p is the binding one.
      if (!divisor_bound_ok(x)) divisor[t0] = false;
      const long double mant = std::log(static_cast<long double>(p)) - (u + 1) * kLn2;
      if (mant < min_mant[t0]) min_mant[t0] = mant;
    }
  }

  std::uint64_t index = 0;
  std::vector<std::uint64_t> block_cnt(64, 0);
  long double run_min_mant = 0.0L;
  bool run_halves = true, run_divisor = true;
  for (int t = 0; t < T; ++t) {
    ACBlockReport b;
    b.t = t + 1;
    b.n_t = plan.n[t];
    b.prime_cap = plan.prime_cap[t];
    for (int u = 0; u < 64; ++u) block_cnt[u] += cnt[t][u];
    run_min_mant = std::min(run_min_mant, min_mant[t]);
    run_halves = run_halves && halves[t];
    run_divisor = run_divisor && divisor[t];
    b.halves_ok = run_halves;
    b.divisor_ok = run_divisor && kLn2 <= std::pow(b.n_t * kLn2, 0.2L);
    unsigned __int128 dyadic = 0;
    for (int u = 0; u < 64; ++u) {
      b.primes += block_cnt[u];
      dyadic += static_cast<unsigned __int128>(block_cnt[u]) << (63 - u);
    }
    index += b.primes + 1;
    b.last_index = index;
    // Every element of the block is at least 2^{n_t} times the smallest mantissa.
    const long double min_log = b.n_t * kLn2 + run_min_mant;
    b.growth_ok = min_log > static_cast<long double>(index) / 4;
    if (t + 1 < T && plan.n[t + 1] < b.n_t + 1) rep.order_ok = false;
    b.row_lower = static_cast<double>(1.0L + std::ldexp(static_cast<long double>(dyadic), -64));
    b.row_target = 0.25 * std::log(std::log(static_cast<double>(b.n_t)));
    rep.blocks.push_back(b);
  }

  // Rows at the powers of two, including the contribution of earlier blocks.
  for (int t = 0; t < T; ++t) {
    long double row = rep.blocks[t].row_lower;
    std::vector<std::uint64_t> c(64, 0);
    for (int s = 0; s < t; ++s) {
      for (int u = 0; u < 64; ++u) c[u] += cnt[s][u];
      const long double shift = static_cast<long double>(plan.n[s]) - static_cast<long double>(plan.n[t]);
      row += std::exp2(shift);
      for (int u = 0; u < 64; ++u) {
        if (c[u]) row += c[u] * std::exp2(shift - u - 1);
      }
    }
    rep.blocks[t].row_value = static_cast<double>(row);
  }

  // Ordered prefix: the smallest mantissas of each block, merged across dyadic ranges.
  std::vector<Element> pre;
  for (int t = 0; t < T && pre.size() < prefix; ++t) {
    const std::size_t room = prefix - pre.size();
    std::vector<std::uint64_t> cand;
    for (unsigned u = 1; u < 64; ++u) {
      const std::uint64_t lo = std::uint64_t{1} << u;
      if (lo > plan.prime_cap[t]) break;
      const std::uint64_t hi = std::min<std::uint64_t>((lo << 1) - 1, plan.prime_cap[t]);
      arith::PrimeStream ps(lo, hi);
      std::uint64_t p;
      for (std::size_t k = 0; k < room && ps.next(p);) {
        if (p >= 3) {
          cand.push_back(p);
          ++k;
        }
      }
    }
    std::sort(cand.begin(), cand.end(), [](std::uint64_t a, std::uint64_t b) { return mantissa_key(a) < mantissa_key(b); });
    const bool whole_block = cand.size() == rep.blocks[t].primes && cand.size() < room;
    if (cand.size() > room) cand.resize(room);
    for (auto p : cand) pre.push_back({plan.n[t] - floor_log2(p) - 1, p, t + 1});
    if (whole_block) pre.push_back({plan.n[t], 1, t + 1});
  }
  rep.prefix_checked = pre.size();

  // psi and rows along the prefix; later I1 terms have psi < 2^{-prefix}.
  std::vector<long double> lhs_i1(T, 0), lhs_i1_off(T, 0), psi_i1(T, 0);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const Element& x = pre[i];
    const std::size_t j = i + 1;
    if (i > 0) {
      const Element& w = pre[i - 1];
      const bool increasing = w.t < x.t || (w.t == x.t && (x.p == 1 || (w.p != 1 && mantissa_key(w.p) < mantissa_key(x.p))));
      if (!increasing) rep.order_ok = false;
    }
    if (!(log_q(x) > static_cast<long double>(j) / 4)) rep.blocks[x.t - 1].growth_ok = false;
    if (x.p == 1) continue;
    const long double psi = std::ldexp(1.0L, -static_cast<int>(j));
    if (psi < 1e-320L) continue;
    long double row = 0;
    for (std::size_t m = 0; m <= i; ++m) row += gcd_ratio(pre[m], x);
    psi_i1[x.t - 1] += psi;
    lhs_i1[x.t - 1] += psi * row;
    lhs_i1_off[x.t - 1] += psi * (row - 1);
  }

  long double lhs = 0, lhs_off = 0, psum = 0;
  for (int t = 0; t < T; ++t) {
    auto& b = rep.blocks[t];
    const long double psi_t = psi_block(t + 1);
    psum += psi_i1[t] + psi_t;
    lhs += lhs_i1[t] + psi_t * b.row_value;
    lhs_off += lhs_i1_off[t] + psi_t * (b.row_value - 1);
    b.psi_sum = static_cast<double>(psum);
    b.lhs = static_cast<double>(lhs);
    b.lhs_offdiag = static_cast<double>(lhs_off);
  }
  finish_ratios(rep);
  return rep;
}

}  // namespace khintchine::seq
