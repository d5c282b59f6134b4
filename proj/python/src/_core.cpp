#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "affmetric/basis.hpp"
#include "affmetric/cli.hpp"
#include "affmetric/constructible.hpp"
#include "affmetric/evaluator.hpp"
#include "affmetric/prenex.hpp"
#include "affmetric/sexpr.hpp"
#include "affmetric/theta.hpp"
#include "affmetric/types.hpp"

namespace py = pybind11;
using namespace affmetric;

namespace {

struct PyFormula {
  Formula formula;
  std::vector<VarId> free;

  std::string text() const { return format_formula_file(formula, free); }
  std::vector<std::string> free_names() const {
    std::vector<std::string> out;
    for (VarId v : free) out.push_back(var_hint(v));
    return out;
  }
};

PyFormula parse(const std::string& text) {
  Parsed p = parse_formula_file(text);
  return {p.formula, p.free};
}

std::string eval_text(const PyFormula& f, const std::string& type, int ell) {
  TupleType t = parse_type(type);
  if (t.size() != f.free.size()) throw std::invalid_argument("type length differs from the number of free variables");
  return eval_type(f.formula, f.free, t, ell).str();
}

py::dict prenex_info(const PyFormula& f) {
  PrenexForm p = to_prenex(f.formula);
  py::list blocks;
  for (const auto& [kind, size] : prefix_blocks(p))
    blocks.append(py::make_tuple(kind == Kind::Inf ? "inf" : "sup", size));
  py::dict d;
  d["formula"] = PyFormula{prenex_formula(p), f.free};
  d["quantifiers"] = p.prefix.size();
  d["alternations"] = count_alternations(p);
  d["blocks"] = blocks;
  return d;
}

Strategy strategy(std::optional<std::uint64_t> sample, std::optional<std::uint64_t> seed) {
  if (!sample) {
    if (seed) throw std::invalid_argument("seed requires sample");
    return {};
  }
  if (!seed) throw std::invalid_argument("sample requires seed");
  return {Strategy::Sample, *sample, *seed};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Affine metric formulas over finite types";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<EvalError>(m, "EvalError", PyExc_ValueError);
  py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_ValueError);

  py::class_<PyFormula>(m, "Formula")
      .def_property_readonly("free", &PyFormula::free_names)
      .def_property_readonly("text", &PyFormula::text)
      .def("eval", &eval_text, py::arg("type"), py::arg("ell") = 4)
      .def("prenex", &prenex_info)
      .def("__str__", [](const PyFormula& f) { return serialize(f.formula); })
      .def("__repr__", [](const PyFormula& f) { return "<Formula " + serialize(f.formula) + ">"; });

  m.def("parse", &parse, py::arg("text"));

  m.def(
      "types",
      [](int n, std::optional<int> cap) {
        std::vector<std::string> out;
        for (const auto& t : enumerate_types(n, cap.value_or(n))) out.push_back(render_type(t));
        return out;
      },
      py::arg("n"), py::arg("cap") = py::none());
  m.def("count_types", &count_types, py::arg("n"), py::arg("cap"));
  m.def("bell", &bell_number, py::arg("n"));
  m.def(
      "canonical_type", [](const std::vector<int>& labels) { return render_type(type_of(labels)); },
      py::arg("labels"));

  m.def("derive", [] {
    std::vector<VarId> v = {fresh_var("x"), fresh_var("y"), fresh_var("z"), fresh_var("w")};
    auto types = enumerate_types(4, 4);
    Matrix mat = value_matrix(build_basis(v), v, types, 4);
    py::dict d;
    d["rank"] = exact_rank(mat);
    d["coefficients"] = coefficients_json(solve_target(mat, d2_target(types)));
    return d;
  });

  m.def(
      "build_theta",
      [](int n, const std::string& mode, bool literal) {
        const ThetaArtifact& a = build_theta(n, parse_mode(mode), literal);
        py::dict d;
        d["n"] = a.n;
        d["mode"] = mode_name(a.mode);
        d["formula"] = PyFormula{a.formula, a.free};
        d["quantifiers"] = a.prenex.prefix.size();
        d["alternations"] = a.alternations;
        d["min_ell"] = a.min_ell;
        return d;
      },
      py::arg("n"), py::arg("mode") = "algorithmic", py::arg("literal") = false);

  m.def(
      "verify",
      [](int n, const std::string& mode, bool literal, int ell, std::optional<std::uint64_t> sample,
         std::optional<std::uint64_t> seed, unsigned workers) {
        Strategy s = strategy(sample, seed);
        const ThetaArtifact& a = build_theta(n, parse_mode(mode), literal);
        VerificationReport r;
        {
          py::gil_scoped_release release;
          r = verify_theta(a, ell, s, workers);
        }
        return report_json(r);
      },
      py::arg("n"), py::arg("mode") = "algorithmic", py::arg("literal") = false, py::arg("ell") = 4,
      py::arg("sample") = py::none(), py::arg("seed") = py::none(), py::arg("workers") = 0);

  m.def(
      "verify_formula",
      [](const PyFormula& f, int ell, std::optional<std::uint64_t> sample, std::optional<std::uint64_t> seed,
         unsigned workers) {
        Strategy s = strategy(sample, seed);
        VerificationReport r;
        {
          py::gil_scoped_release release;
          r = verify_formula(f.formula, f.free, ell, s, workers);
        }
        return report_json(r);
      },
      py::arg("formula"), py::arg("ell") = 4, py::arg("sample") = py::none(), py::arg("seed") = py::none(),
      py::arg("workers") = 0);

  m.def("named_sets", &named_set_names);
  m.def("explain", &explain_json, py::arg("name"), py::arg("ell") = 4);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
