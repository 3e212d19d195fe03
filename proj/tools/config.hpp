#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace khintchine::cli {

// Flat "section.key" -> value store read from INI-style text or JSON.
// Every typed read is recorded so the effective configuration can be echoed.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin);
  static Config load(const std::string& path);

  // Command-line override; reported as coming from the flag.
  void set(const std::string& key, const std::string& value, const std::string& flag);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback);
  std::optional<std::string> opt_str(const std::string& key);
  std::uint64_t u64(const std::string& key, std::uint64_t fallback);
  std::optional<std::uint64_t> opt_u64(const std::string& key);
  double real(const std::string& key, double fallback);
  std::optional<double> opt_real(const std::string& key);
  bool flag(const std::string& key, bool fallback);
  std::vector<std::uint64_t> u64_list(const std::string& key, std::vector<std::uint64_t> fallback);
  std::vector<double> real_list(const std::string& key, std::vector<double> fallback);

  // Rejects keys that no command read.
  void check_unused() const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  // {"section": {"key": "value"}} of every value the run used, defaults included.
  nlohmann::ordered_json effective() const;

 private:
  struct Entry {
    std::string value;
    std::string where;  // "path:line" or "--flag"
    mutable bool used = false;
  };
  const Entry* find(const std::string& key) const;
  void record(const std::string& key, const std::string& value);

  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> effective_;
  std::string origin_ = "<defaults>";
};

}  // namespace khintchine::cli
