#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "resbvp/conditions.hpp"
#include "resbvp/io.hpp"
#include "resbvp/oracle.hpp"
#include "resbvp/solver.hpp"
#include "resbvp/worked_example.hpp"

namespace py = pybind11;
using namespace resbvp;

namespace {

ProblemSpec parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, std::string("problem is not valid JSON: ") + e.what());
  }
  return problem_from_json(doc);
}

Orientation parse_orientation(const std::string& s) {
  if (s == "standard") return Orientation::Standard;
  if (s == "reversed") return Orientation::Reversed;
  throw Error(ErrorKind::Input, "orientation must be 'standard' or 'reversed'");
}

// Explicit (c, d) checks one orientation or both; otherwise the grid search.
ConditionReport certify(const LinearAnalysis& la, const ProblemSpec& spec, std::optional<double> c,
                        std::optional<double> d, const std::string& orientation, double d_cap) {
  if (c.has_value() != d.has_value()) throw Error(ErrorKind::Input, "give both c and d or neither");
  if (c) {
    if (orientation != "both") return certify_main(la, spec, *c, *d, parse_orientation(orientation));
    ConditionReport std_rep = certify_main(la, spec, *c, *d, Orientation::Standard);
    if (std_rep.passed) return std_rep;
    ConditionReport rev = certify_main(la, spec, *c, *d, Orientation::Reversed);
    return rev.passed ? rev : std_rep;
  }
  const AutoCertificate ac = auto_certificate(la, spec, default_c_grid(), d_cap);
  if (ac.report) return *ac.report;
  if (ac.first_failure) return *ac.first_failure;
  throw Error(ErrorKind::NoConvergence, "automatic search produced no report");
}

std::string analyze_json(const std::string& problem) {
  return dump(report_json(analyze(parse_problem(problem))));
}

std::string check_json(const std::string& problem, std::optional<double> c, std::optional<double> d,
                       const std::string& orientation, double d_cap) {
  const ProblemSpec spec = parse_problem(problem);
  const LinearAnalysis la = analyze(spec);
  return dump(report_json(certify(la, spec, c, d, orientation, d_cap)));
}

std::string solve_json(const std::string& problem, std::optional<double> c, std::optional<double> d,
                       const std::string& orientation, double d_cap, double solve_tol) {
  const ProblemSpec spec = parse_problem(problem);
  const LinearAnalysis la = analyze(spec);
  ConditionReport rep;
  if (!spec.g().is_constant_zero()) {
    rep = certify(la, spec, c, d, orientation, d_cap);
    if (!rep.passed) throw Error(ErrorKind::Input, "no passing certificate: " + rep.verdict());
  }
  SolverOptions opts;
  opts.solve_tol = solve_tol;
  return dump(report_json(solve(make_bifurcation_problem(la, spec, rep, opts), opts)));
}

std::string oracle_json(const std::string& problem, int starts, double box, std::uint64_t seed) {
  if (starts < 1) throw Error(ErrorKind::Input, "starts must be at least 1");
  if (!(box > 0.0)) throw Error(ErrorKind::Input, "box must be positive");
  const FullSystem fs(parse_problem(problem));
  return dump(report_json(multistart(fs, starts, box, seed), fs));
}

std::string example_problem(const std::string& g) {
  if (!g.empty()) return dump(problem_to_json(worked_example_spec(Expr::parse(g))));
  const LinearAnalysis la = analyze(worked_example_spec());
  return dump(problem_to_json(worked_example_spec(log_family(la).g)));
}

int nullity(const std::string& problem) { return linear_nullity(parse_problem(problem)).nullity; }

}  // namespace

PYBIND11_MODULE(_resbvp, m) {
  m.doc() = "Resonant multipoint boundary value problems for difference equations";

  static py::exception<Error> numeric_error(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      if (e.is_input_error()) {
        PyErr_SetString(PyExc_ValueError, msg.c_str());
      } else {
        numeric_error(msg.c_str());
      }
    }
  });

  m.def("analyze", &analyze_json, py::arg("problem"));
  m.def("check", &check_json, py::arg("problem"), py::arg("c") = py::none(),
        py::arg("d") = py::none(), py::arg("orientation") = "both", py::arg("d_cap") = 1e8);
  m.def("solve", &solve_json, py::arg("problem"), py::arg("c") = py::none(),
        py::arg("d") = py::none(), py::arg("orientation") = "both", py::arg("d_cap") = 1e8,
        py::arg("solve_tol") = 1e-10);
  m.def("oracle", &oracle_json, py::arg("problem"), py::arg("starts") = 64, py::arg("box") = 10.0,
        py::arg("seed") = 1);
  m.def("nullity", &nullity, py::arg("problem"));
  m.def("example_problem", &example_problem, py::arg("g") = "");
  m.def(
      "evaluate", [](const std::string& expr, double t, double x) { return Expr::parse(expr)(t, x); },
      py::arg("expr"), py::arg("t"), py::arg("x"));
}
