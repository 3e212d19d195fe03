#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace khintchine {

// The approximating function psi, evaluated per sequence index in the log domain.
class ApproxFn {
 public:
  enum class Kind { constant, inverse_log_power, index_power, table };

  static ApproxFn constant(double r);
  // min(1, (ln q)^{-lambda}).
  static ApproxFn inverse_log(double lambda = 1.0);
  // psi(q_n) = n^{-a}.
  static ApproxFn index_power(double a);
  // psi(q_n) = exp(log_values[n-1]).
  static ApproxFn table(std::vector<double> log_values, std::string name = "table");

  // Accepts "const:R", "invlog[:LAMBDA]", "index_power:A".
  static ApproxFn parse(const std::string& spec);
  std::string describe() const;

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  // ln psi(q_n) for the 1-based index n and ln q_n; -inf encodes psi = 0.
  double log_psi(std::size_t n, double log_q) const;
  double psi(std::size_t n, double log_q) const;

  // ln psi over the first log_q.size() indices.
  std::vector<double> log_table(std::span<const double> log_q) const;

 private:
  ApproxFn(Kind k, double p) : kind_(k), param_(p) {}

  Kind kind_;
  double param_ = 0.0;
  std::vector<double> table_;
  std::string name_;
};

}  // namespace khintchine
