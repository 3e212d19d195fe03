#include "khintchine/approx.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "khintchine/errors.hpp"

namespace khintchine {

ApproxFn ApproxFn::constant(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("constant psi must lie in (0, 1]");
  return ApproxFn(Kind::constant, r);
}

ApproxFn ApproxFn::inverse_log(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("inverse-log exponent must be positive");
  return ApproxFn(Kind::inverse_log_power, lambda);
}

ApproxFn ApproxFn::index_power(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("index power must be >= 0");
  return ApproxFn(Kind::index_power, a);
}

ApproxFn ApproxFn::table(std::vector<double> log_values, std::string name) {
  for (double v : log_values) {
    if (v > 1e-12 || std::isnan(v)) throw DomainError("psi table entries must satisfy 0 <= psi <= 1");
  }
  ApproxFn f(Kind::table, 0.0);
  f.table_ = std::move(log_values);
  f.name_ = std::move(name);
  return f;
}

ApproxFn ApproxFn::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  double value = std::numeric_limits<double>::quiet_NaN();
  if (colon != std::string::npos) {
    std::istringstream in(spec.substr(colon + 1));
    in >> value;
    if (in.fail() || !in.eof()) throw ConfigError("psi spec '" + spec + "': malformed number");
  }
  if (head == "const" || head == "constant") {
    if (std::isnan(value)) throw ConfigError("psi spec 'const' needs a value, e.g. const:0.25");
    return constant(value);
  }
  if (head == "invlog") return inverse_log(std::isnan(value) ? 1.0 : value);
  if (head == "index_power") {
    if (std::isnan(value)) throw ConfigError("psi spec 'index_power' needs an exponent, e.g. index_power:2");
    return index_power(value);
  }
  throw ConfigError("unknown psi spec '" + spec + "' (expected const:R, invlog[:L], index_power:A)");
}

std::string ApproxFn::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::constant: out << "const:" << param_; break;
    case Kind::inverse_log_power: out << "invlog:" << param_; break;
    case Kind::index_power: out << "index_power:" << param_; break;
    case Kind::table: out << name_; break;
  }
  return out.str();
}

double ApproxFn::log_psi(std::size_t n, double log_q) const {
  switch (kind_) {
    case Kind::constant:
      return std::log(param_);
    case Kind::inverse_log_power:
      return log_q <= 1.0 ? 0.0 : -param_ * std::log(log_q);
    case Kind::index_power:
      return -param_ * std::log(static_cast<double>(n));
    case Kind::table:
      if (n == 0 || n > table_.size()) throw RangeError("psi table has no entry for index " + std::to_string(n));
      return table_[n - 1];
  }
  return 0.0;
}

double ApproxFn::psi(std::size_t n, double log_q) const { return std::exp(log_psi(n, log_q)); }

std::vector<double> ApproxFn::log_table(std::span<const double> log_q) const {
  std::vector<double> out(log_q.size());
  for (std::size_t i = 0; i < log_q.size(); ++i) out[i] = log_psi(i + 1, log_q[i]);
  return out;
}

}  // namespace khintchine
