#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "khintchine/errors.hpp"

namespace khintchine::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t line_of(const std::string& text, std::size_t pos) {
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(pos, text.size())), '\n')) + 1;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
  errno = 0;
  out = std::strtoull(s.c_str(), nullptr, 10);
  return errno == 0;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

// Flattens a two-level JSON object; key lines come from a forward scan of the text.
struct JsonFlattener : nlohmann::json_sax<nlohmann::json> {
  const std::string& text;
  const std::string& origin;
  std::map<std::string, std::pair<std::string, std::size_t>> out;
  std::vector<std::string> path;
  int depth = 0;
  std::size_t cursor = 0, key_line = 0;
  std::string list;
  bool in_array = false;

  JsonFlattener(const std::string& t, const std::string& o) : text(t), origin(o) {}

  [[noreturn]] void bad(const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(key_line) + ": " + what);
  }
  std::string full_key() const {
    std::string k;
    for (const auto& p : path) k += (k.empty() ? "" : ".") + p;
    return k;
  }
  bool scalar(const std::string& v) {
    if (in_array) {
      list += (list.empty() ? "" : ",") + v;
      return true;
    }
    if (depth < 1) bad("top level must be an object");
    out[full_key()] = {v, key_line};
    path.pop_back();
    return true;
  }
  bool null() override { bad("null values are not allowed"); }
  bool boolean(bool v) override { return scalar(v ? "true" : "false"); }
  bool number_integer(number_integer_t v) override { return scalar(std::to_string(v)); }
  bool number_unsigned(number_unsigned_t v) override { return scalar(std::to_string(v)); }
  bool number_float(number_float_t, const string_t& s) override { return scalar(s); }
  bool string(string_t& v) override { return scalar(v); }
  bool binary(binary_t&) override { bad("binary values are not allowed"); }
  bool start_object(std::size_t) override {
    if (in_array) bad("objects inside arrays are not allowed");
    if (++depth > 2) bad("sections cannot be nested");
    return true;
  }
  bool key(string_t& k) override {
    const auto pos = text.find('"' + k + '"', cursor);
    if (pos != std::string::npos) cursor = pos + k.size() + 2;
    key_line = line_of(text, pos == std::string::npos ? cursor : pos);
    path.push_back(k);
    return true;
  }
  bool end_object() override {
    --depth;
    if (!path.empty()) path.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    if (in_array) bad("nested arrays are not allowed");
    in_array = true;
    list.clear();
    return true;
  }
  bool end_array() override {
    in_array = false;
    return scalar(list);
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) override {
    throw ConfigError(origin + ":" + std::to_string(line_of(text, pos)) + ": malformed JSON (" + e.what() + ")");
  }
};

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    JsonFlattener f(text, origin);
    nlohmann::json::sax_parse(text, &f);
    for (auto& [k, v] : f.out) cfg.entries_[k] = {v.first, origin + ":" + std::to_string(v.second)};
    return cfg;
  }
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string where = origin + ":" + std::to_string(line);
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty() || section.find_first_of(" .=") != std::string::npos)
        throw ConfigError(where + ": invalid section name '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty() || key.find_first_of(" .") != std::string::npos)
      throw ConfigError(where + ": invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.entries_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
    cfg.entries_[full] = {trim(s.substr(eq + 1)), where};
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ":0: cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void Config::set(const std::string& key, const std::string& value, const std::string& flag) {
  entries_[key] = {value, flag};
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

void Config::record(const std::string& key, const std::string& value) { effective_[key] = value; }

void Config::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  const std::string where = it == entries_.end() ? origin_ + ":0" : it->second.where;
  throw ConfigError(where + ": " + key + ": " + what);
}

std::optional<std::string> Config::opt_str(const std::string& key) {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  record(key, e->value);
  return e->value;
}

std::string Config::str(const std::string& key, const std::string& fallback) {
  auto v = opt_str(key);
  if (!v) record(key, fallback);
  return v.value_or(fallback);
}

std::optional<std::uint64_t> Config::opt_u64(const std::string& key) {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  std::uint64_t v = 0;
  if (!parse_u64(e->value, v)) fail(key, "expected a nonnegative integer, got '" + e->value + "'");
  record(key, std::to_string(v));
  return v;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) {
  auto v = opt_u64(key);
  if (!v) record(key, std::to_string(fallback));
  return v.value_or(fallback);
}

std::optional<double> Config::opt_real(const std::string& key) {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  double v = 0;
  if (!parse_real(e->value, v)) fail(key, "expected a number, got '" + e->value + "'");
  record(key, e->value);
  return v;
}

double Config::real(const std::string& key, double fallback) {
  auto v = opt_real(key);
  if (!v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, fallback);
    record(key, std::string(buf, r.ptr));
  }
  return v.value_or(fallback);
}

bool Config::flag(const std::string& key, bool fallback) {
  const auto* e = find(key);
  if (!e) {
    record(key, fallback ? "true" : "false");
    return fallback;
  }
  if (e->value == "true" || e->value == "1" || e->value == "yes") return record(key, "true"), true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return record(key, "false"), false;
  fail(key, "expected true or false, got '" + e->value + "'");
}

std::vector<std::uint64_t> Config::u64_list(const std::string& key, std::vector<std::uint64_t> fallback) {
  const auto* e = find(key);
  std::vector<std::uint64_t> out;
  if (!e) {
    out = std::move(fallback);
  } else {
    for (const auto& item : split_list(e->value)) {
      std::uint64_t v = 0;
      if (!parse_u64(item, v)) fail(key, "expected a comma-separated list of nonnegative integers, got '" + item + "'");
      out.push_back(v);
    }
  }
  std::string echo;
  for (auto v : out) echo += (echo.empty() ? "" : ",") + std::to_string(v);
  record(key, echo);
  return out;
}

std::vector<double> Config::real_list(const std::string& key, std::vector<double> fallback) {
  const auto* e = find(key);
  std::vector<double> out;
  if (!e) {
    out = std::move(fallback);
  } else {
    for (const auto& item : split_list(e->value)) {
      double v = 0;
      if (!parse_real(item, v)) fail(key, "expected a comma-separated list of numbers, got '" + item + "'");
      out.push_back(v);
    }
  }
  std::string echo;
  for (std::size_t i = 0; i < out.size(); ++i) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, out[i]);
    echo += (i ? "," : "") + std::string(buf, r.ptr);
  }
  record(key, echo);
  return out;
}

void Config::check_unused() const {
  for (const auto& [k, e] : entries_)
    if (!e.used) throw ConfigError(e.where + ": unknown key '" + k + "' for this subcommand");
}

nlohmann::ordered_json Config::effective() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : effective_) {
    const auto dot = k.find('.');
    if (dot == std::string::npos)
      j[k] = v;
    else
      j[k.substr(0, dot)][k.substr(dot + 1)] = v;
  }
  return j;
}

}  // namespace khintchine::cli
