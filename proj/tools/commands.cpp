#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "khintchine/appendix_c.hpp"
#include "khintchine/counting.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/measures.hpp"
#include "khintchine/sequence.hpp"

namespace khintchine::cli {

using nlohmann::ordered_json;

namespace {

std::string u128_str(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

template <class F>
auto guarded(Config& cfg, const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ResourceError&) {
    throw;
  } catch (const Error& e) {
    cfg.fail(key, e.what());
  }
}

// [sequence] kind = smooth | geometric | footnote | convergents | perturbed | file
seq::SeqRecord build_sequence(Config& cfg) {
  const std::string kind = cfg.str("sequence.kind", "smooth");
  seq::SeqRecord s = [&]() -> seq::SeqRecord {
    if (kind == "smooth" || kind == "perturbed") {
      const auto primes = cfg.u64_list("sequence.basis", {2, 3});
      seq::SmoothLimit lim;
      const auto max_log2 = cfg.opt_real("sequence.max_log2");
      if (max_log2) lim.log_cap = *max_log2 * std::log(2.0);
      lim.count = cfg.u64("sequence.count", max_log2 ? 0 : 100);
      auto base = guarded(cfg, "sequence.basis", [&] { return seq::gen_smooth(arith::make_basis(primes), lim); });
      if (kind == "smooth") return base;
      const auto reservoir = cfg.u64_list("sequence.reservoir", {});
      const auto count = cfg.u64("sequence.replacements", 1);
      return guarded(cfg, "sequence.reservoir", [&] { return seq::perturb_smooth(base, reservoir, count).seq; });
    }
    if (kind == "geometric") {
      const auto q0 = cfg.u64("sequence.q0", 1), ratio = cfg.u64("sequence.ratio", 2), count = cfg.u64("sequence.count", 64);
      return guarded(cfg, "sequence.ratio", [&] { return seq::gen_geometric(q0, ratio, count); });
    }
    if (kind == "footnote") {
      const auto count = cfg.u64("sequence.count", 12);
      return guarded(cfg, "sequence.count", [&] { return seq::gen_footnote(count); });
    }
    if (kind == "convergents") {
      auto a = cfg.u64_list("sequence.quotients", {});
      if (a.empty()) a.assign(cfg.u64("sequence.count", 40), 1);
      return guarded(cfg, "sequence.quotients", [&] { return seq::convergent_denominators(a); });
    }
    if (kind == "file") {
      const auto path = cfg.str("sequence.path", "");
      if (path.empty()) cfg.fail("sequence.path", "file sequences need a path");
      return guarded(cfg, "sequence.path", [&] { return seq::read_sequence_file(path); });
    }
    cfg.fail("sequence.kind", "unknown kind '" + kind + "' (smooth, geometric, footnote, convergents, perturbed, file)");
  }();
  if (auto t = cfg.opt_u64("sequence.drop_le")) s = seq::drop_small(s, *t);
  if (auto n = cfg.opt_u64("sequence.limit")) s = s.prefix(*n);
  if (s.empty()) cfg.fail("sequence.kind", "the sequence is empty");
  return s;
}

ApproxFn build_psi(Config& cfg) {
  const auto spec = cfg.str("psi.spec", "invlog:1");
  return guarded(cfg, "psi.spec", [&] { return ApproxFn::parse(spec); });
}

measures::MeasureModel build_measure(Config& cfg) {
  const auto spec = cfg.str("measure.spec", "lebesgue");
  return guarded(cfg, "measure.spec", [&] { return measures::MeasureModel::parse(spec); });
}

std::size_t resolve_N(Config& cfg, const std::string& key, const seq::SeqRecord& s) {
  const auto N = cfg.u64(key, s.size());
  if (N == 0 || N > s.size()) cfg.fail(key, "must lie in [1, " + std::to_string(s.size()) + "]");
  return N;
}

double unit_interval(Config& cfg, const std::string& key, double fallback) {
  const double v = cfg.real(key, fallback);
  if (!(v >= 0 && v < 1)) cfg.fail(key, "must lie in [0, 1)");
  return v;
}

void write_table(Run& run, const std::string& stem, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  if (!run.json()) {
    run.write(stem + ".csv", csv(header, rows));
    return;
  }
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json o;
    for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
    arr.push_back(o);
  }
  run.write(stem + ".json", arr.dump(2) + "\n");
}

}  // namespace

void cmd_gen_seq(Run& run) {
  auto& cfg = run.cfg();
  const auto s = build_sequence(cfg);
  cfg.check_unused();
  run.stage("generate");
  if (run.json())
    run.write("sequence.json", seq::to_json(s));
  else
    run.write("sequence.txt", seq::to_text(s));
  run.stage("write");
  std::cout << "generated " << s.size() << " terms (" << seq::to_string(s.kind()) << ")\n";
}

void cmd_check_seq(Run& run) {
  auto& cfg = run.cfg();
  const auto s = build_sequence(cfg);
  const double alpha = cfg.real("check.alpha", 0.5);
  if (!(alpha > 0 && alpha < 1)) cfg.fail("check.alpha", "must lie in (0, 1)");
  const auto pair_limit = cfg.u64("check.pair_limit", std::min<std::uint64_t>(s.size(), 12));
  const auto s_max = cfg.u64("check.s_max", 64);
  const auto B = cfg.opt_real("check.growth_B"), C = cfg.opt_real("check.growth_C");
  if (B.has_value() != C.has_value()) cfg.fail(B ? "check.growth_B" : "check.growth_C", "growth_B and growth_C go together");
  const auto D = cfg.opt_u64("check.D");
  const double D_eps = cfg.real("check.D_eps", 0.2);
  const auto n0 = cfg.u64("check.D_n0", 1);
  cfg.check_unused();
  run.stage("load");

  ordered_json rep;
  rep["length"] = s.size();
  rep["kind"] = seq::to_string(s.kind());
  if (s.size() >= 2) rep["lacunarity_K"] = seq::check_lacunary(s);
  if (B) {
    const auto g = seq::check_growth(s, *B, *C);
    rep["growth"] = {{"B", *B}, {"C", *C}, {"ok", g.ok}};
    if (g.first_violation) rep["growth"]["first_violation"] = *g.first_violation;
  }
  const auto a = seq::check_alpha_separated(s, alpha, pair_limit);
  run.stage("alpha");
  const auto violations = a.expand(s_max);
  rep["alpha"] = {{"alpha", alpha}, {"pair_limit", pair_limit}, {"classes", a.classes.size()},
                  {"total", u128_str(a.total)}, {"m0", a.m0}, {"listed_s_max", s_max}};
  if (D) {
    if (!B) cfg.fail("check.D", "Property D needs growth_B and growth_C");
    const auto d = seq::check_property_D(s, static_cast<int>(*D), D_eps, n0, *B, *C);
    rep["property_D"] = {{"ok", d.ok}, {"growth_ok", d.growth_ok}, {"violations", d.violations}};
    for (const auto& w : d.witnesses)
      rep["property_D"]["witnesses"].push_back({{"n", w.n}, {"reason", w.reason}, {"prime", w.prime}});
  }
  run.stage("checks");

  std::vector<std::vector<std::string>> rows;
  for (const auto& v : violations)
    rows.push_back({std::to_string(v.m), std::to_string(v.n), std::to_string(v.s), std::to_string(v.t)});
  if (run.json()) {
    rep["violations"] = ordered_json::array();
    for (const auto& v : violations) rep["violations"].push_back({{"m", v.m}, {"n", v.n}, {"s", v.s}, {"t", v.t}});
    run.write("check_seq.json", rep.dump(2) + "\n");
  } else {
    run.write("check_seq_summary.json", rep.dump(2) + "\n");
    run.write("check_seq_violations.csv", csv({"m", "n", "s", "t"}, rows));
  }
  std::cout << "alpha-separation: " << u128_str(a.total) << " violations, m0 = " << a.m0 << "\n";
  for (const auto& v : violations) std::cout << "violation m=" << v.m << " n=" << v.n << " s=" << v.s << " t=" << v.t << "\n";
}

void cmd_gcd_sum(Run& run) {
  auto& cfg = run.cfg();
  const auto s = build_sequence(cfg);
  const auto k = cfg.u64("gcd.k", s.basis()->k());
  if (k < 1 || k > 30) cfg.fail("gcd.k", "must lie in [1, 30]");
  const auto from = cfg.u64("gcd.from", 2), to = cfg.u64("gcd.to", s.size()), step = cfg.u64("gcd.step", 1);
  if (from < 2 || to > s.size() || from > to || step == 0) cfg.fail("gcd.from", "need 2 <= from <= to <= length and step >= 1");
  cfg.check_unused();
  const double bound = counting::thm_gcd_bound(static_cast<int>(k));
  std::vector<std::vector<std::string>> rows;
  double running = 0;
  for (std::uint64_t n = from; n <= to; n += step) {
    const double row = counting::gcd_sum_row(s, n);
    running = std::max(running, row);
    rows.push_back({std::to_string(n), fmt(s.q(n).log()), fmt(row), fmt(running), fmt(bound), row <= bound ? "1" : "0"});
  }
  run.stage("rows");
  write_table(run, "gcd_sum", {"n", "log_q", "row", "running_max", "bound", "within"}, rows);
  std::cout << "max row " << fmt(running) << " vs bound " << fmt(bound) << (running <= bound ? " (ok)" : " (EXCEEDED)") << "\n";
}

void cmd_count(Run& run) {
  auto& cfg = run.cfg();
  const auto s = build_sequence(cfg);
  const auto psi = build_psi(cfg);
  const auto m = build_measure(cfg);
  counting::ExperimentConfig ec;
  ec.N = resolve_N(cfg, "count.N", s);
  ec.samples = cfg.u64("count.samples", 100);
  if (ec.samples == 0) cfg.fail("count.samples", "must be at least 1");
  ec.gamma = unit_interval(cfg, "count.gamma", 0.0);
  ec.shape = guarded(cfg, "count.shape", [&] { return counting::parse_shape(cfg.str("count.shape", "thm1")); });
  ec.eps = cfg.real("count.eps", 0.1);
  ec.shape_constant = cfg.real("count.shape_constant", 1.0);
  ec.precision = static_cast<unsigned>(cfg.u64("count.precision", 0));
  ec.compute_E = cfg.flag("count.compute_E", false);
  ec.seed = run.seed();
  ec.threads = run.threads();
  cfg.check_unused();
  const unsigned P = std::max(ec.precision, counting::required_precision(s, ec.N));
  double bytes = static_cast<double>(run.threads() + 2) * static_cast<double>(P) / 4;
  for (std::size_t n = 1; n <= ec.N; ++n)
    bytes += 96 + (s.q(n).log() / std::log(2.0) - s.q(n).two_adic()) / 8;
  if (bytes > static_cast<double>(run.memory_budget()))
    throw ResourceError("count: estimated " + fmt(bytes / 1e9) + " GB exceeds the memory budget");
  run.stage("setup");
  const auto res = guarded(cfg, "count.precision", [&] { return counting::run_count_experiment(m, s, psi, ec); });
  run.stage("count");
  if (run.json()) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : res.reports) {
      ordered_json o{{"sample", r.sample}, {"N", r.N}, {"R", r.R}, {"Psi", r.Psi}};
      o["E"] = r.E ? ordered_json(*r.E) : ordered_json();
      o["residual"] = r.residual;
      o["shape_bound"] = r.shape_bound;
      arr.push_back(o);
    }
    run.write("count.json", arr.dump(2) + "\n");
  } else {
    run.write("count.csv", res.to_csv());
  }
  run.write("count_summary.json", res.summary_json());
  std::cout << "Psi = " << fmt(res.summary.Psi) << ", median |R/(2Psi)-1| = " << fmt(res.summary.median_abs_rel)
            << ", within shape: " << fmt(res.summary.fraction_within) << "\n";
}

void cmd_measure(Run& run) {
  auto& cfg = run.cfg();
  const auto m = build_measure(cfg);
  const std::string task = cfg.str("measure.task", "decay");
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  if (task == "decay") {
    const double A = cfg.real("measure.A", 1.0);
    const auto j_min = cfg.u64("measure.j_min", 1), j_max = cfg.u64("measure.j_max", 20);
    if (j_min < 1 || j_max < j_min || j_max > 60) cfg.fail("measure.j_max", "need 1 <= j_min <= j_max <= 60");
    cfg.check_unused();
    const auto p = measures::decay_profile(m, A, static_cast<int>(j_max), static_cast<int>(j_min), run.threads());
    header = {"j", "t_lo", "sup_grid", "sup_integer", "value", "running_max"};
    for (const auto& r : p.rows)
      rows.push_back({std::to_string(r.j), fmt(r.t_lo), fmt(r.sup_grid), fmt(r.sup_integer), fmt(r.value), fmt(r.running_max)});
    std::cout << "decay profile consistent: " << (p.consistent ? "yes" : "no") << "\n";
  } else if (task == "lem2") {
    const auto qs = cfg.u64_list("measure.q", {3, 10, 97});
    const double gamma = unit_interval(cfg, "measure.gamma", 0.0);
    const auto psis = cfg.real_list("measure.psi", {0.1});
    const auto s_cap = cfg.u64("measure.s_cap", 1000);
    const auto method = guarded(cfg, "measure.method", [&] { return measures::parse_mass_method(cfg.str("measure.method", "automatic")); });
    measures::MassOptions opt;
    opt.seed = run.seed();
    opt.mc_samples = cfg.u64("measure.mc_samples", opt.mc_samples);
    cfg.check_unused();
    header = {"q", "gamma", "psi", "mass", "mass_lo", "mass_hi", "bound1", "bound2", "max_abs", "series_partial", "series_tail"};
    for (auto q : qs)
      for (double psi : psis) {
        if (q == 0 || !(psi > 0 && psi <= 0.5)) cfg.fail("measure.q", "need q >= 1 and psi in (0, 1/2]");
        const auto mass = guarded(cfg, "measure.method", [&] { return measures::mu_E_mass(m, q, gamma, psi, method, opt); });
        std::vector<std::uint64_t> primes{2};
        for (const auto& [p, e] : arith::factorize(q))
          if (p != 2) primes.push_back(p);
        const auto fq = arith::FactoredNat::from_u64(arith::make_basis(primes), q);
        const auto b = guarded(cfg, "measure.s_cap", [&] { return measures::lem2_bounds(m, fq, psi, static_cast<std::int64_t>(s_cap)); });
        rows.push_back({std::to_string(q), fmt(gamma), fmt(psi), fmt(mass.value), fmt(mass.lo), fmt(mass.hi), fmt(b.bound1),
                        fmt(b.bound2), fmt(b.max_abs), fmt(b.series_partial), fmt(b.series_tail)});
      }
  } else if (task == "conv" || task == "del") {
    const auto s = build_sequence(cfg);
    if (task == "conv") {
      const auto s_cap = cfg.u64("measure.s_cap", 1000);
      const auto N = resolve_N(cfg, "measure.N", s);
      const double tol = cfg.real("measure.tol", 1e-6);
      cfg.check_unused();
      const auto c = guarded(cfg, "measure.s_cap", [&] {
        return measures::conv_conditions(m, s, static_cast<std::int64_t>(s_cap), N, tol);
      });
      header = {"series", "n", "term", "partial"};
      for (const auto& r : c.max_series) rows.push_back({"max", std::to_string(r.n), fmt(r.term), fmt(r.partial)});
      for (const auto& r : c.weighted_series) rows.push_back({"weighted", std::to_string(r.n), fmt(r.term), fmt(r.partial)});
      std::cout << "max series converges: " << c.max_converges << ", weighted: " << c.weighted_converges << "\n";
    } else {
      const auto h = cfg.u64("measure.h", 1);
      const auto N = resolve_N(cfg, "measure.N", s);
      if (h == 0) cfg.fail("measure.h", "must be nonzero");
      cfg.check_unused();
      const auto d = measures::del_criterion(m, s, static_cast<std::int64_t>(h), N);
      header = {"N", "inner", "partial", "increment"};
      for (const auto& r : d) rows.push_back({std::to_string(r.N), fmt(r.inner), fmt(r.partial), fmt(r.increment)});
    }
  } else if (task == "reduction") {
    const auto f = guarded(cfg, "measure.f", [&] { return measures::DecreasingFn::parse(cfg.str("measure.f", "loglog:0.5")); });
    const double K = cfg.real("measure.K", 2.0);
    if (!(K > 1)) cfg.fail("measure.K", "must exceed 1");
    const double V = cfg.real("measure.loglog_max", 1e4);
    const auto direct = cfg.u64("measure.direct_max", 1'000'000);
    const double tol = cfg.real("measure.tol", 0.05);
    cfg.check_unused();
    const auto r = guarded(cfg, "measure.f", [&] { return measures::del_lacunary_reduction(f, K, V, direct, tol); });
    header = {"loglog_N", "a_lo", "a_hi", "b_lo", "b_hi"};
    for (const auto& row : r.rows)
      rows.push_back({fmt(row.loglog_N), fmt(row.a_lo), fmt(row.a_hi), fmt(row.b_lo), fmt(row.b_hi)});
    std::cout << "A cauchy: " << r.a_cauchy << ", B cauchy: " << r.b_cauchy << ", equivalent: " << r.equivalent << "\n";
  } else {
    cfg.fail("measure.task", "unknown task '" + task + "' (decay, lem2, conv, del, reduction)");
  }
  run.stage(task);
  write_table(run, "measure_" + task, header, rows);
}

void cmd_appendix_c(Run& run) {
  auto& cfg = run.cfg();
  const auto mode = run.strict() ? seq::ACMode::strict : seq::ACMode::demo;
  const auto t_max = cfg.u64("appendix_c.t_max", run.strict() ? 2 : 6);
  std::optional<std::uint64_t> n1;
  if (!run.strict()) n1 = cfg.u64("appendix_c.n1", 64);
  const auto prefix = cfg.u64("appendix_c.prefix", 1100);
  const bool materialize = cfg.flag("appendix_c.materialize", false);
  if (t_max < 1 || t_max > 40) cfg.fail("appendix_c.t_max", "must lie in [1, 40]");
  cfg.check_unused();
  const auto plan = guarded(cfg, "appendix_c.t_max", [&] { return seq::plan_appendixC(mode, static_cast<int>(t_max), n1); });
  run.stage("plan");
  seq::ACVerifyReport rep;
  if (materialize) {
    const auto art = seq::build_appendixC(plan, run.memory_budget());
    run.stage("build");
    rep = seq::verify_appendixC(art);
    run.write("appendix_c_sequence.txt", seq::to_text(art.seq));
  } else {
    const double bytes = static_cast<double>(prefix) * 256 + 64.0 * std::sqrt(static_cast<double>(plan.prime_cap.back()));
    if (bytes > static_cast<double>(run.memory_budget())) throw ResourceError("appendix-c: prefix exceeds the memory budget");
    rep = seq::verify_appendixC(plan, prefix);
  }
  run.stage("verify");
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : rep.blocks)
    rows.push_back({std::to_string(b.t), std::to_string(b.n_t), std::to_string(b.prime_cap), std::to_string(b.primes),
                    std::to_string(b.last_index), b.halves_ok ? "1" : "0", b.growth_ok ? "1" : "0", b.divisor_ok ? "1" : "0",
                    fmt(b.row_lower), fmt(b.row_value), fmt(b.row_target), b.row_ok ? "1" : "0", fmt(b.psi_sum), fmt(b.lhs),
                    fmt(b.lhs_offdiag), fmt(b.log_ratio)});
  write_table(run, "appendix_c",
              {"t", "n_t", "prime_cap", "primes", "last_index", "halves_ok", "growth_ok", "divisor_ok", "row_lower",
               "row_value", "row_target", "row_ok", "psi_sum", "lhs", "lhs_offdiag", "log_ratio"},
              rows);
  ordered_json j{{"mode", run.strict() ? "strict" : "demo"}, {"n1", rep.plan.n1}, {"t_max", rep.plan.t_max},
                 {"prefix_checked", rep.prefix_checked}, {"order_ok", rep.order_ok},
                 {"invariants_ok", rep.invariants_ok}, {"divisor_ok", rep.divisor_ok}};
  run.write("appendix_c_summary.json", j.dump(2) + "\n");
  std::cout << "n1 = " << rep.plan.n1 << ", invariants " << (rep.invariants_ok ? "ok" : "FAILED") << ", divisor bound "
            << (rep.divisor_ok ? "ok" : "FAILED") << "\n";
}

void cmd_littlewood(Run& run) {
  auto& cfg = run.cfg();
  auto quotients = cfg.u64_list("littlewood.quotients", {});
  if (quotients.empty()) {
    quotients.assign(cfg.u64("littlewood.golden_depth", 200), 1);
    quotients[0] = 0;
  }
  const auto N = cfg.u64("littlewood.N", 1u << 16);
  if (N < 3) cfg.fail("littlewood.N", "must be at least 3");
  const unsigned need = static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(N)))) + 64;
  const auto P = static_cast<unsigned>(cfg.u64("littlewood.precision", need));
  if (P < need) cfg.fail("littlewood.precision", "must be at least " + std::to_string(need) + " bits for this N");
  const double gamma = unit_interval(cfg, "littlewood.gamma", 0.0);
  const auto y_spec = cfg.str("littlewood.y", "uniform");
  cfg.check_unused();
  const auto y = y_spec == "uniform"
                     ? counting::HighPrecisionPoint::uniform(run.seed(), gamma, P)
                     : guarded(cfg, "littlewood.y", [&] {
                         const auto r = measures::Rational::parse(y_spec);
                         return counting::HighPrecisionPoint::from_rational(r.num, r.den, gamma, P);
                       });
  run.stage("setup");
  const auto rows = guarded(cfg, "littlewood.quotients", [&] { return counting::littlewood_count(quotients, y, N); });
  run.stage("scan");
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) out.push_back({std::to_string(r.N), std::to_string(r.count), fmt(r.loglog_N)});
  write_table(run, "littlewood", {"N", "count", "loglog_N"}, out);
  std::cout << "count at N = " << rows.back().N << ": " << rows.back().count << " (ln ln N = " << fmt(rows.back().loglog_N) << ")\n";
}

}  // namespace khintchine::cli
