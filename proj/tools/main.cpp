#include <exception>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"
#include "khintchine/errors.hpp"

using namespace khintchine;
using namespace khintchine::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inhomogeneous Khintchine experiments: sequences, windows, measures and counting"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, mode, format;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "Config file (key = value with [sections], or JSON)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--mode", mode, "strict or demo")->check(CLI::IsMember({"strict", "demo"}));
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  const std::map<std::string, std::pair<std::string, std::function<void(Run&)>>> commands = {
      {"gen-seq", {"Generate a denominator sequence", cmd_gen_seq}},
      {"check-seq", {"Lacunarity, growth, alpha-separation and Property D checks", cmd_check_seq}},
      {"gcd-sum", {"GCD-sum rows against the smooth-number bound", cmd_gcd_sum}},
      {"count", {"Counting experiment R(x, N) over sampled points", cmd_count}},
      {"measure", {"Fourier decay, Lemma-2 bounds, convergence and DEL tables", cmd_measure}},
      {"appendix-c", {"Bad-sequence construction and its inequalities", cmd_appendix_c}},
      {"littlewood", {"Multiplicative counting against ln ln N", cmd_littlewood}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    Config cfg = config_path.empty() ? Config::parse("", "<defaults>") : Config::load(config_path);
    if (app.count("--seed")) cfg.set("run.seed", std::to_string(seed), "--seed");
    if (app.count("--threads")) cfg.set("run.threads", std::to_string(threads), "--threads");
    if (app.count("--out")) cfg.set("run.out", out_dir, "--out");
    if (app.count("--mode")) cfg.set("run.mode", mode, "--mode");
    if (app.count("--format")) cfg.set("run.format", format, "--format");
    const auto* sub = app.get_subcommands().front();
    Run run(sub->get_name(), std::move(cfg), std::vector<std::string>(argv, argv + argc));
    commands.at(sub->get_name()).second(run);
    run.finish();
    return kExitOk;
  } catch (const ResourceError& e) {
    std::cerr << "error: resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: resource limit: out of memory\n";
    return kExitResource;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
