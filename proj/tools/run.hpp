#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace khintchine::cli {

inline constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(const std::string& data);
// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const std::string& path, const std::string& data);

struct Stage {
  std::string name;
  double seconds = 0.0;
};

struct OutputFile {
  std::string file;
  std::size_t bytes = 0;
  std::string sha256;
};

// State shared by every subcommand: resolved flags, output directory and the manifest.
class Run {
 public:
  Run(std::string subcommand, Config cfg, std::vector<std::string> argv);

  Config& cfg() { return cfg_; }
  const std::string& subcommand() const { return sub_; }
  std::uint64_t seed() const { return seed_; }
  int threads() const { return threads_; }
  bool strict() const { return mode_ == "strict"; }
  bool json() const { return format_ == "json"; }
  const std::string& format() const { return format_; }
  std::size_t memory_budget() const { return memory_budget_; }

  // Closes a timed stage started at the previous call (or at construction).
  void stage(const std::string& name);
  // Writes under the output directory and records the digest.
  void write(const std::string& name, const std::string& data);
  // Writes manifest.json last.
  void finish();

 private:
  std::string sub_;
  Config cfg_;
  std::vector<std::string> argv_;
  std::string out_dir_, mode_, format_;
  std::uint64_t seed_ = 1;
  int threads_ = 1;
  std::size_t memory_budget_ = 0;
  std::chrono::steady_clock::time_point start_, last_;
  std::vector<Stage> stages_;
  std::vector<OutputFile> outputs_;
};

std::string fmt(double v);
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace khintchine::cli
