#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "khintchine/approx.hpp"
#include "khintchine/counting.hpp"
#include "khintchine/errors.hpp"
#include "khintchine/measures.hpp"
#include "khintchine/primes.hpp"
#include "khintchine/sequence.hpp"
#include "khintchine/smooth.hpp"
#include "khintchine/windows.hpp"

namespace py = pybind11;
using namespace khintchine;

namespace {

windows::Side parse_side(const std::string& s) {
  if (s == "upper") return windows::Side::upper;
  if (s == "lower") return windows::Side::lower;
  throw ConfigError("side must be 'upper' or 'lower'");
}

py::int_ to_pyint(const arith::FactoredNat& v) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(v.to_decimal().c_str(), nullptr, 10));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Inhomogeneous Khintchine toolkit";

  static py::exception<Error> base(m, "KhintchineError", PyExc_ValueError);
  static py::exception<ResourceError> resource(m, "ResourceError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ResourceError& e) {
      resource(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("pi_S", [](const std::vector<std::uint64_t>& primes, double X) { return arith::pi_S(arith::PrimeBasis(primes), X); },
        py::arg("primes"), py::arg("X"));
  m.def("pi_S_bound", &arith::pi_S_bound, py::arg("k"), py::arg("X"));
  m.def("minimal_solutions",
        [](const std::vector<std::uint64_t>& primes, double K) { return arith::minimal_solutions(arith::PrimeBasis(primes), K); },
        py::arg("primes"), py::arg("K"));

  py::class_<seq::SeqRecord>(m, "Sequence")
      .def("__len__", &seq::SeqRecord::size)
      .def("q", [](const seq::SeqRecord& s, std::size_t n) { return to_pyint(s.q(n)); }, py::arg("n"))
      .def("values", [](const seq::SeqRecord& s) {
        py::list out;
        for (const auto& t : s.terms()) out.append(to_pyint(t));
        return out;
      })
      .def("logs", &seq::SeqRecord::logs)
      .def("prefix", &seq::SeqRecord::prefix, py::arg("n"))
      .def_property_readonly("kind", [](const seq::SeqRecord& s) { return seq::to_string(s.kind()); })
      .def("to_text", [](const seq::SeqRecord& s) { return seq::to_text(s); })
      .def("to_json", [](const seq::SeqRecord& s) { return seq::to_json(s); });

  m.def("gen_smooth",
        [](const std::vector<std::uint64_t>& primes, std::size_t count) {
          return seq::gen_smooth(arith::make_basis(primes), {count});
        },
        py::arg("primes"), py::arg("count"));
  m.def("gen_geometric", &seq::gen_geometric, py::arg("q0"), py::arg("ratio"), py::arg("count"));
  m.def("gen_footnote", &seq::gen_footnote, py::arg("count"));
  m.def("convergent_denominators",
        [](const std::vector<std::uint64_t>& a) { return seq::convergent_denominators(a); }, py::arg("quotients"));
  m.def("drop_small", &seq::drop_small, py::arg("seq"), py::arg("threshold"));
  m.def("parse_text", &seq::parse_text, py::arg("text"));
  m.def("check_lacunary", &seq::check_lacunary, py::arg("seq"));
  m.def("alpha_violations",
        [](const seq::SeqRecord& s, double alpha, std::size_t pair_limit, std::uint64_t s_max) {
          py::list out;
          for (const auto& v : seq::check_alpha_separated(s, alpha, pair_limit).expand(s_max))
            out.append(py::make_tuple(v.m, v.n, v.s, v.t));
          return out;
        },
        py::arg("seq"), py::arg("alpha"), py::arg("pair_limit"), py::arg("s_max"));

  m.def("chi_hat",
        [](std::int64_t k, double delta, double eps, const std::string& side) {
          return windows::chi_hat(k, {delta, eps, parse_side(side)});
        },
        py::arg("k"), py::arg("delta"), py::arg("eps"), py::arg("side") = "upper");
  m.def("W_hat",
        [](std::int64_t k, std::uint64_t q, double gamma, double eps, double psi_q, const std::string& side) {
          return windows::W_hat(k, {q, gamma, eps, psi_q}, parse_side(side));
        },
        py::arg("k"), py::arg("q"), py::arg("gamma"), py::arg("eps"), py::arg("psi_q"), py::arg("side") = "upper");
  m.def("W_hat_bound", &windows::W_hat_bound, py::arg("s"), py::arg("eps"), py::arg("psi_q"));
  m.def("E_q_intervals",
        [](std::uint64_t q, double gamma, double psi_q) {
          std::vector<std::pair<double, double>> out;
          for (const auto& iv : windows::E_q_intervals(q, gamma, psi_q)) out.emplace_back(iv.lo, iv.hi);
          return out;
        },
        py::arg("q"), py::arg("gamma"), py::arg("psi_q"));

  py::class_<measures::MeasureModel>(m, "Measure")
      .def_static("parse", &measures::MeasureModel::parse, py::arg("spec"))
      .def_property_readonly("name", &measures::MeasureModel::name)
      .def("mu_hat", [](const measures::MeasureModel& mm, double t) { return measures::mu_hat(mm, t); }, py::arg("t"))
      .def("sample", [](const measures::MeasureModel& mm, std::uint64_t seed, std::size_t n) { return measures::sample(mm, seed, n); },
           py::arg("seed"), py::arg("n"))
      .def("mass",
           [](const measures::MeasureModel& mm, std::uint64_t q, double gamma, double psi_q) {
             const auto e = measures::mu_E_mass(mm, q, gamma, psi_q);
             return py::make_tuple(e.value, e.lo, e.hi);
           },
           py::arg("q"), py::arg("gamma"), py::arg("psi_q"));

  m.def("psi_sum", [](const seq::SeqRecord& s, const std::string& psi, std::size_t N) {
          return counting::psi_sum(s, ApproxFn::parse(psi), N);
        },
        py::arg("seq"), py::arg("psi"), py::arg("N"));
  m.def("error_E", [](const seq::SeqRecord& s, const std::string& psi, std::size_t N) {
          return counting::error_E(s, ApproxFn::parse(psi), N);
        },
        py::arg("seq"), py::arg("psi"), py::arg("N"));
  m.def("gcd_sum_row", &counting::gcd_sum_row, py::arg("seq"), py::arg("n"));
  m.def("thm_gcd_bound", &counting::thm_gcd_bound, py::arg("k"));
  m.def("star_discrepancy", &counting::star_discrepancy, py::arg("points"));
  m.def("count_experiment",
        [](const measures::MeasureModel& mm, const seq::SeqRecord& s, const std::string& psi, std::size_t samples,
           std::uint64_t seed, const std::string& shape, double gamma, std::size_t N, int threads) {
          counting::ExperimentConfig cfg;
          cfg.samples = samples;
          cfg.seed = seed;
          cfg.shape = counting::parse_shape(shape);
          cfg.gamma = gamma;
          cfg.N = N;
          cfg.threads = threads;
          const auto r = counting::run_count_experiment(mm, s, ApproxFn::parse(psi), cfg);
          return py::make_tuple(r.to_csv(), r.summary_json());
        },
        py::arg("measure"), py::arg("seq"), py::arg("psi") = "invlog:1", py::arg("samples") = 10, py::arg("seed") = 1,
        py::arg("shape") = "thm1", py::arg("gamma") = 0.0, py::arg("N") = 0, py::arg("threads") = 1);
}
