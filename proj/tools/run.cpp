#include "run.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <charconv>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "khintchine/errors.hpp"

namespace khintchine::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void atomic_write(const std::string& path, const std::string& data) {
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ResourceError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename into " + target.string());
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

Run::Run(std::string subcommand, Config cfg, std::vector<std::string> argv)
    : sub_(std::move(subcommand)), cfg_(std::move(cfg)), argv_(std::move(argv)) {
  start_ = last_ = std::chrono::steady_clock::now();
  seed_ = cfg_.u64("run.seed", 1);
  const auto t = cfg_.u64("run.threads", 1);
  if (t < 1 || t > 1024) cfg_.fail("run.threads", "must lie in [1, 1024]");
  threads_ = static_cast<int>(t);
  mode_ = cfg_.str("run.mode", "demo");
  if (mode_ != "strict" && mode_ != "demo") cfg_.fail("run.mode", "must be strict or demo");
  format_ = cfg_.str("run.format", "csv");
  if (format_ != "csv" && format_ != "json") cfg_.fail("run.format", "must be csv or json");
  out_dir_ = cfg_.str("run.out", ".");
  const double gb = cfg_.real("limits.memory_gb", 4.0);
  if (!(gb > 0)) cfg_.fail("limits.memory_gb", "must be positive");
  memory_budget_ = static_cast<std::size_t>(gb * 1024 * 1024 * 1024);
}

void Run::stage(const std::string& name) {
  const auto now = std::chrono::steady_clock::now();
  stages_.push_back({name, std::chrono::duration<double>(now - last_).count()});
  last_ = now;
}

void Run::write(const std::string& name, const std::string& data) {
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw Error("cannot create output directory " + out_dir_);
  atomic_write((fs::path(out_dir_) / name).string(), data);
  outputs_.push_back({name, data.size(), sha256_hex(data)});
}

void Run::finish() {
  nlohmann::ordered_json j;
  j["tool"] = "khintchine";
  j["version"] = kVersion;
  j["subcommand"] = sub_;
  j["argv"] = argv_;
  j["config"] = cfg_.effective();
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["finished_utc"] = stamp;
  j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages_) j["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}});
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : outputs_) j["outputs"].push_back({{"file", o.file}, {"bytes", o.bytes}, {"sha256", o.sha256}});
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  atomic_write((fs::path(out_dir_) / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace khintchine::cli
