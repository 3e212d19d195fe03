#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khintchine/factored.hpp"

namespace khintchine::seq {

using arith::BasisPtr;
using arith::FactoredNat;

enum class SeqKind { geometric, smooth, appendixC, perturbed, convergents, custom };

std::string to_string(SeqKind kind);
SeqKind parse_kind(const std::string& name);

struct SeqMeta {
  std::optional<double> K;      // lacunarity ratio
  std::optional<double> B, C;   // growth constants
  std::optional<double> alpha;  // separation parameter
  std::optional<int> D;         // prime-divisor bound
  std::vector<std::pair<std::string, std::string>> notes;
};

// Strictly increasing sequence of factored integers over one basis.
class SeqRecord {
 public:
  SeqRecord(BasisPtr basis, std::vector<FactoredNat> terms, SeqKind kind, SeqMeta meta = {});

  const BasisPtr& basis() const noexcept { return basis_; }
  const std::vector<FactoredNat>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  // 1-based access q_n.
  const FactoredNat& q(std::size_t n) const { return terms_.at(n - 1); }
  SeqKind kind() const noexcept { return kind_; }
  const SeqMeta& meta() const noexcept { return meta_; }
  SeqMeta& meta() noexcept { return meta_; }

  std::vector<double> logs() const;
  // Exact machine values of the first n terms; RangeError past the 63-bit cap.
  std::vector<std::uint64_t> to_u64(std::size_t n) const;
  SeqRecord prefix(std::size_t n) const;

 private:
  BasisPtr basis_;
  std::vector<FactoredNat> terms_;
  SeqKind kind_;
  SeqMeta meta_;
};

// Builds a record from machine integers; the basis is the union of their prime divisors.
SeqRecord from_integers(std::span<const std::uint64_t> values, SeqKind kind = SeqKind::custom);

struct SmoothLimit {
  std::size_t count = 0;  // 0 means no count limit
  double log_cap = std::numeric_limits<double>::infinity();
};

SeqRecord gen_smooth(BasisPtr basis, SmoothLimit limit);
SeqRecord gen_geometric(std::uint64_t q0, std::uint64_t ratio, std::size_t count);
// q_n = 2^n + [n even].
SeqRecord gen_footnote(std::size_t count);
SeqRecord convergent_denominators(std::span<const std::uint64_t> partial_quotients);
SeqRecord drop_small(const SeqRecord& seq, std::uint64_t threshold);

// inf_n q_{n+1} / q_n.
double check_lacunary(const SeqRecord& seq);

struct GrowthVerdict {
  bool ok = true;
  std::optional<std::size_t> first_violation;  // 1-based index
};
GrowthVerdict check_growth(const SeqRecord& seq, double B, double C);

// All solutions of 1 <= |s q_m - t q_n| < q_m^alpha with s <= m^12, t >= 1 for one (m, n, c, sign)
// form an arithmetic progression in s.
struct ViolationClass {
  std::size_t m = 0, n = 0;
  std::uint64_t c = 0;   // |s q_m - t q_n| = c * gcd(q_m, q_n)
  int sign = 1;          // sign of s q_m - t q_n
  std::uint64_t s_first = 0, s_step = 0;
  std::uint64_t t_first = 0, t_step = 0;
  unsigned __int128 count = 0;
};

struct Violation {
  std::size_t m, n;
  std::uint64_t s, t;
  friend auto operator<=>(const Violation&, const Violation&) = default;
};

struct AlphaReport {
  std::vector<ViolationClass> classes;
  unsigned __int128 total = 0;
  std::size_t m0 = 0;  // largest violating m, 0 if none
  // Concrete violations with s <= s_max, ordered.
  std::vector<Violation> expand(std::uint64_t s_max) const;
};

AlphaReport check_alpha_separated(const SeqRecord& seq, double alpha, std::size_t pair_limit);

struct PropertyDWitness {
  std::size_t n = 0;
  std::string reason;
  std::uint64_t prime = 0;
};

struct PropertyDReport {
  bool ok = true;
  bool growth_ok = true;
  std::vector<PropertyDWitness> witnesses;  // at most 32 recorded
  std::size_t violations = 0;
};

PropertyDReport check_property_D(const SeqRecord& seq, int D, double eps, std::size_t n0, double B, double C);

struct Replacement {
  std::size_t index = 0;  // 1-based index t of the replaced term
  std::size_t s = 0;      // 1-based index of the multiplied term
  std::uint64_t prime = 0;
};

struct PerturbResult {
  SeqRecord seq;
  std::size_t achieved = 0;
  std::vector<Replacement> replacements;
};

PerturbResult perturb_smooth(const SeqRecord& base, std::span<const std::uint64_t> reservoir, std::size_t count);

// Text and JSON interchange.
std::string to_text(const SeqRecord& seq);
SeqRecord parse_text(const std::string& text);
std::string to_json(const SeqRecord& seq);
SeqRecord parse_json(const std::string& text);
SeqRecord read_sequence_file(const std::string& path);

}  // namespace khintchine::seq
