// Python bindings.  Structured values cross the boundary as JSON text and are
// decoded by the pure-Python wrapper in bergman/__init__.py.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <numbers>

#include "bergman/report.hpp"

namespace py = pybind11;
using namespace bergman;
using nlohmann::json;

namespace {

WeightSpec parse(const std::string& spec_json) { return spec_from_json(json::parse(spec_json)); }

std::string normalize(const std::string& spec_json) {
  const WeightJet<Cd> w = normalize_weight(parse(spec_json));
  return json{{"n", w.n}, {"q", w.q}, {"lambdas", w.lambda}, {"normal_form", spec_to_json(spec_from_jet(w))}}.dump();
}

std::string report(const std::string& spec_json, double tol, bool exact, bool fit) {
  ReportOptions opts;
  opts.tol = tol;
  opts.exact = exact;
  opts.with_fit = fit;
  return report_to_json(run_report(parse(spec_json), opts)).dump();
}

std::pair<double, double> trace_b1(const std::string& spec_json) {
  const WeightJet<Cd> w = normalize_weight(parse(spec_json));
  return {trace_b1_coordinate(w), trace_b1_invariant(w)};
}

std::string c_value(const std::string& spec_json) {
  const CConstant<Cd> c = c_constant(normalize_weight(parse(spec_json)));
  return json{{"closed_form", c.closed_form.real()}, {"hat_route", c.hat_route.real()}, {"discrepancy", c.discrepancy}}
      .dump();
}

double phase_residual_of(const std::string& spec_json, int order) {
  const WeightJet<Cd> w = normalize_weight(parse(spec_json));
  return phase_residual(w, phase_solve_recursive(w, order), std::min(order - 1, 4));
}

std::string fit(const std::string& spec_json, const std::vector<double>& k_grid) {
  const ExpansionFit f = bergman_fit_oracle(parse(spec_json), k_grid);
  return json{{"c0", f.c0}, {"c1", f.c1}, {"c2", f.c2}, {"values", f.values}, {"residual_rms", f.residual_rms}}.dump();
}

double oracle(const std::string& spec_json, double k) { return bergman_diagonal_oracle(radial_profile(parse(spec_json)), k); }

std::string random_spec(int n, int q, std::uint64_t seed) {
  RandomWeightOptions opt;
  opt.n = n;
  opt.q = q;
  return spec_to_json(spec_from_jet(random_normal_weight(opt, seed))).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bergman kernel expansion coefficients";
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  m.def("normalize", &normalize, py::arg("spec_json"));
  m.def("report", &report, py::arg("spec_json"), py::arg("tol") = 1e-9, py::arg("exact") = false,
        py::arg("fit") = false);
  m.def("trace_b1", &trace_b1, py::arg("spec_json"), "(coordinate route, invariant route)");
  m.def("c_constant", &c_value, py::arg("spec_json"));
  m.def("phase_residual", &phase_residual_of, py::arg("spec_json"), py::arg("order") = 5);
  m.def("fit", &fit, py::arg("spec_json"), py::arg("k_grid"));
  m.def("oracle", &oracle, py::arg("spec_json"), py::arg("k"));
  m.def("random_spec", &random_spec, py::arg("n"), py::arg("q"), py::arg("seed"));
}
