#include <fstream>
#include <sstream>

#include "json.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/sequence.hpp"

namespace khintchine::seq {

using arith::PrimePower;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string meta_line(const SeqMeta& m) {
  std::ostringstream out;
  if (m.K) out << " K=" << fmt(*m.K);
  if (m.B) out << " B=" << fmt(*m.B);
  if (m.C) out << " C=" << fmt(*m.C);
  if (m.alpha) out << " alpha=" << fmt(*m.alpha);
  if (m.D) out << " D=" << *m.D;
  return out.str();
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail(line, "malformed number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(line, "malformed number '" + s + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) fail(line, "expected a nonnegative integer, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    fail(line, "integer out of range '" + s + "'");
  }
}

}  // namespace

std::string to_text(const SeqRecord& seq) {
  std::ostringstream out;
  out << "# khintchine sequence v1\n";
  out << "basis:";
  for (auto p : seq.basis()->primes()) out << ' ' << p;
  out << "\nkind: " << to_string(seq.kind()) << '\n';
  const std::string meta = meta_line(seq.meta());
  if (!meta.empty()) out << "meta:" << meta << '\n';
  for (const auto& [k, v] : seq.meta().notes) out << "note: " << k << '=' << v << '\n';
  out << "terms: " << seq.size() << '\n';
  for (const auto& q : seq.terms()) {
    for (std::size_t i = 0; i < q.exponents().size(); ++i) out << (i ? " " : "") << q.exponent(i);
    if (q.extra()) out << ' ' << q.extra()->prime << '^' << q.extra()->exponent;
    out << '\n';
  }
  return out.str();
}

SeqRecord parse_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  arith::BasisPtr basis;
  SeqKind kind = SeqKind::custom;
  SeqMeta meta;
  std::optional<std::size_t> declared;
  std::vector<arith::FactoredNat> terms;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    const bool header = colon != std::string::npos && std::isalpha(static_cast<unsigned char>(line[0]));
    if (header) {
      const std::string key = line.substr(0, colon);
      std::istringstream rest(line.substr(colon + 1));
      if (key == "basis") {
        std::vector<std::uint64_t> ps;
        std::string tok;
        while (rest >> tok) ps.push_back(parse_u64(tok, lineno));
        try {
          basis = arith::make_basis(ps);
        } catch (const Error& e) {
          fail(lineno, e.what());
        }
      } else if (key == "kind") {
        std::string name;
        rest >> name;
        try {
          kind = parse_kind(name);
        } catch (const Error& e) {
          fail(lineno, e.what());
        }
      } else if (key == "meta") {
        std::string tok;
        while (rest >> tok) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) fail(lineno, "meta entries must be key=value");
          const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
          if (k == "K") meta.K = parse_double(v, lineno);
          else if (k == "B") meta.B = parse_double(v, lineno);
          else if (k == "C") meta.C = parse_double(v, lineno);
          else if (k == "alpha") meta.alpha = parse_double(v, lineno);
          else if (k == "D") meta.D = static_cast<int>(parse_u64(v, lineno));
          else fail(lineno, "unknown meta key '" + k + "'");
        }
      } else if (key == "note") {
        std::string body;
        std::getline(rest >> std::ws, body);
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail(lineno, "note entries must be key=value");
        meta.notes.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      } else if (key == "terms") {
        std::string tok;
        rest >> tok;
        declared = parse_u64(tok, lineno);
      } else {
        fail(lineno, "unknown header '" + key + "'");
      }
      continue;
    }
    if (!basis) fail(lineno, "term line before the basis header");
    std::istringstream row(line);
    std::vector<std::uint32_t> exps;
    std::optional<PrimePower> extra;
    std::string tok;
    while (row >> tok) {
      const auto caret = tok.find('^');
      if (caret != std::string::npos) {
        if (extra) fail(lineno, "at most one extra prime power per term");
        extra = PrimePower{parse_u64(tok.substr(0, caret), lineno),
                           static_cast<std::uint32_t>(parse_u64(tok.substr(caret + 1), lineno))};
      } else {
        if (extra) fail(lineno, "the extra prime power must come last");
        const std::uint64_t e = parse_u64(tok, lineno);
        if (e > UINT32_MAX) fail(lineno, "exponent too large");
        exps.push_back(static_cast<std::uint32_t>(e));
      }
    }
    if (exps.size() != basis->k()) {
      fail(lineno, "expected " + std::to_string(basis->k()) + " exponents, got " + std::to_string(exps.size()));
    }
    try {
      terms.emplace_back(basis, std::move(exps), extra);
    } catch (const Error& e) {
      fail(lineno, e.what());
    }
  }
  if (!basis) throw ConfigError("sequence text has no basis header");
  if (terms.empty()) throw ConfigError("sequence has no terms");
  if (declared && *declared != terms.size()) {
    throw ConfigError("terms header declares " + std::to_string(*declared) + " terms, found " + std::to_string(terms.size()));
  }
  return SeqRecord(basis, std::move(terms), kind, std::move(meta));
}

std::string to_json(const SeqRecord& seq) {
  json j;
  j["kind"] = to_string(seq.kind());
  j["basis"] = std::vector<std::uint64_t>(seq.basis()->primes().begin(), seq.basis()->primes().end());
  json meta = json::object();
  const auto& m = seq.meta();
  if (m.K) meta["K"] = *m.K;
  if (m.B) meta["B"] = *m.B;
  if (m.C) meta["C"] = *m.C;
  if (m.alpha) meta["alpha"] = *m.alpha;
  if (m.D) meta["D"] = *m.D;
  json notes = json::array();
  for (const auto& [k, v] : m.notes) notes.push_back({k, v});
  meta["notes"] = notes;
  j["meta"] = meta;
  json terms = json::array();
  for (const auto& q : seq.terms()) {
    json t;
    t["exponents"] = q.exponents();
    t["extra"] = q.extra() ? json::array({q.extra()->prime, q.extra()->exponent}) : json(nullptr);
    t["log"] = q.log();
    if (q.fits_machine()) t["value"] = q.to_u64();
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j.dump(1);
}

SeqRecord parse_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sequence JSON: ") + e.what());
  }
  try {
    auto basis = arith::make_basis(j.at("basis").get<std::vector<std::uint64_t>>());
    SeqMeta meta;
    const json& m = j.value("meta", json::object());
    if (m.contains("K")) meta.K = m["K"].get<double>();
    if (m.contains("B")) meta.B = m["B"].get<double>();
    if (m.contains("C")) meta.C = m["C"].get<double>();
    if (m.contains("alpha")) meta.alpha = m["alpha"].get<double>();
    if (m.contains("D")) meta.D = m["D"].get<int>();
    if (m.contains("notes")) {
      for (const auto& n : m["notes"]) meta.notes.emplace_back(n.at(0).get<std::string>(), n.at(1).get<std::string>());
    }
    std::vector<arith::FactoredNat> terms;
    for (const auto& t : j.at("terms")) {
      std::optional<PrimePower> extra;
      if (t.contains("extra") && !t["extra"].is_null()) {
        extra = PrimePower{t["extra"].at(0).get<std::uint64_t>(), t["extra"].at(1).get<std::uint32_t>()};
      }
      terms.emplace_back(basis, t.at("exponents").get<std::vector<std::uint32_t>>(), extra);
    }
    if (terms.empty()) throw ConfigError("sequence has no terms");
    return SeqRecord(basis, std::move(terms), parse_kind(j.value("kind", std::string("custom"))), std::move(meta));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sequence JSON: ") + e.what());
  }
}

SeqRecord read_sequence_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open sequence file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ConfigError("sequence file '" + path + "' is empty");
  return text[first] == '{' ? parse_json(text) : parse_text(text);
}

}  // namespace khintchine::seq
