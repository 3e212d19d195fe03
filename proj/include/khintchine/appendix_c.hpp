#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "khintchine/approx.hpp"
#include "khintchine/sequence.hpp"

namespace khintchine::seq {

enum class ACMode { strict, demo };

struct AppendixCPlan {
  ACMode mode = ACMode::demo;
  std::uint64_t n1 = 0;
  int t_max = 0;
  std::vector<std::uint64_t> n;          // n_t, doubling schedule
  std::vector<std::uint64_t> prime_cap;  // floor(n_t ln n_t)
};

// Smallest n1 with ln ln n1 > 2 ln 2 + 1 and 2 ln n + 2 ln ln n < n^{1/5} for all n >= n1.
std::uint64_t strict_n1();

AppendixCPlan plan_appendixC(ACMode mode, int t_max, std::optional<std::uint64_t> demo_n1 = std::nullopt);

// Upper estimate of the element count, used for the memory budget.
std::uint64_t estimated_elements(const AppendixCPlan& plan);

struct AppendixCArtifact {
  SeqRecord seq;
  ApproxFn psi;
  std::vector<std::size_t> I1, I2;  // 1-based indices
  std::vector<int> t_of;            // block of each index (0-based vector over indices)
  std::vector<std::uint64_t> n_t;
};

// Materialized construction; ResourceError when the estimate exceeds memory_budget bytes.
AppendixCArtifact build_appendixC(const AppendixCPlan& plan, std::size_t memory_budget = std::size_t{4} << 30);

struct ACBlockReport {
  int t = 0;
  std::uint64_t n_t = 0;
  std::uint64_t prime_cap = 0;
  std::uint64_t primes = 0;          // #P_t
  std::uint64_t last_index = 0;      // index N_t of 2^{n_t}
  bool halves_ok = true;             // q_t/2 < q_{t,p} < q_t
  bool growth_ok = true;             // ln q_j > j/4 on the block
  bool divisor_ok = true;            // ln p <= (ln q)^{1/5}, at most two primes
  double row_lower = 0.0;            // exact dyadic lower bound of the row at N_t
  double row_value = 0.0;            // row including earlier blocks
  double row_target = 0.0;           // (1/4) ln ln n_t
  bool row_ok = true;
  double psi_sum = 0.0;              // sum_{j <= N_t} psi(q_j)
  double lhs = 0.0;                  // sum_{j <= N_t} psi(q_j) sum_{m <= j} (q_m,q_j)/q_j
  double lhs_offdiag = 0.0;          // same with m < j
  double log_ratio = 0.0;            // ln(lhs) / psi_sum
};

struct ACVerifyReport {
  AppendixCPlan plan;
  std::vector<ACBlockReport> blocks;
  std::size_t prefix_checked = 0;  // leading elements ordered and checked individually
  bool order_ok = true;
  bool invariants_ok = true;  // order, halves, growth, row bound
  bool divisor_ok = true;     // Property D prime-size bound with exponent 1/5
};

// Streams the primes once; memory stays O(prefix + sqrt(cap)).
ACVerifyReport verify_appendixC(const AppendixCPlan& plan, std::size_t prefix = 1100);

// Same quantities computed on a materialized artifact, pair by pair.
ACVerifyReport verify_appendixC(const AppendixCArtifact& art);

}  // namespace khintchine::seq
