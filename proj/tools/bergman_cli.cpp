// Command line front end: one JSON document (or a flat text listing) on
// stdout, diagnostics on stderr, exit codes from bergman::ExitCode.
#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>

#include "bergman/report.hpp"

using namespace bergman;
using nlohmann::json;

namespace {

struct GlobalFlags {
  bool json_output = false;
  double tol = 1e-9;
  bool exact = false;
  std::optional<std::uint64_t> seed;
  std::vector<int> random;  // {n, q}
  std::optional<int> q;
  std::string spec_path;
};

WeightSpec load_spec(const GlobalFlags& g, std::uint64_t seed_offset = 0) {
  if (!g.random.empty()) {
    RandomWeightOptions opt;
    opt.n = g.random.at(0);
    opt.q = g.random.at(1);
    if (opt.n < 1 || opt.n > 3 || opt.q < 0 || opt.q > opt.n)
      throw ValidationError("--random expects n in 1..3 and 0 <= q <= n");
    return spec_from_jet(random_normal_weight(opt, g.seed.value_or(1) + seed_offset));
  }
  if (g.spec_path.empty()) throw ValidationError("no weight given: pass a spec file, '-' for stdin, or --random n q");
  std::string text;
  if (g.spec_path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(g.spec_path);
    if (!in) throw ValidationError("cannot open spec file '" + g.spec_path + "'");
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
  }
  return spec_from_json(j);
}

void print_text(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) print_text(value, prefix.empty() ? key : prefix + "." + key, os);
  } else if (j.is_array() && !j.empty() && j.front().is_object()) {
    for (std::size_t i = 0; i < j.size(); ++i) print_text(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << " = " << j.dump() << "\n";
  }
}

void emit(const GlobalFlags& g, const json& doc) {
  if (g.json_output)
    std::cout << doc.dump(2) << "\n";
  else
    print_text(doc, "", std::cout);
}

json complex_json(const Cd& z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::vector<int> block_exponents(const Mono& m, int n, Block b) {
  std::vector<int> e;
  for (int j = 0; j < n; ++j) e.push_back(m.exp(block_var(n, b, j)));
  return e;
}

template <class S, class Value>
json jet_terms(const PolyJet<S>& jet, int n, Value value) {
  json terms = json::array();
  for (const auto& [m, c] : jet.sorted_terms())
    terms.push_back({{"zbar", block_exponents(m, n, Block::ZBar)},
                     {"z", block_exponents(m, n, Block::Z)},
                     {"wbar", block_exponents(m, n, Block::WBar)},
                     {"w", block_exponents(m, n, Block::W)},
                     {"value", value(c)}});
  return terms;
}

json cmd_normalize(const GlobalFlags& g) {
  const WeightSpec spec = load_spec(g);
  if (g.exact) {
    const WeightJet<QComplex> w = normalize_weight_exact(spec);
    json lambdas = json::array();
    for (const auto& l : w.lambda) lambdas.push_back(l.get_str());
    return {{"n", w.n}, {"q", w.q}, {"lambdas", lambdas},
            {"higher_order", jet_terms(w.phi, w.n, [](const QComplex& c) {
               return json{{"re", c.re.get_str()}, {"im", c.im.get_str()}};
             })}};
  }
  const WeightJet<Cd> w = normalize_weight(spec);
  check_requested_q(w, g.q);
  json frame = json::array();
  for (const auto& u : w.frame) frame.push_back(complex_json(u));
  return {{"n", w.n},
          {"q", w.q},
          {"lambdas", w.lambda},
          {"frame_column_major", frame},
          {"normal_form", spec_to_json(spec_from_jet(w))},
          {"removed_pluriharmonic", jet_terms(w.removed, w.n, complex_json)}};
}

json cmd_phase(const GlobalFlags& g, int order) {
  const WeightSpec spec = load_spec(g);
  json doc;
  double residual = 0.0;
  if (g.exact) {
    const WeightJet<QComplex> w = normalize_weight_exact(spec);
    const PhaseJet<QComplex> psi = phase_solve_recursive(w, order);
    residual = phase_residual(w, psi, std::min(order - 1, 4));
    doc["coefficients"] = jet_terms(psi.psi, w.n, [](const QComplex& c) {
      return json{{"re", c.re.get_str()}, {"im", c.im.get_str()}};
    });
  } else {
    const WeightJet<Cd> w = normalize_weight(spec);
    check_requested_q(w, g.q);
    const PhaseJet<Cd> psi = phase_solve_recursive(w, order);
    residual = phase_residual(w, psi, std::min(order - 1, 4));
    doc["coefficients"] = jet_terms(psi.psi, w.n, complex_json);
  }
  doc["order"] = order;
  doc["residual"] = residual;
  doc["passed"] = residual <= g.tol;
  return doc;
}

json cmd_b0(const GlobalFlags& g) {
  const WeightSpec spec = load_spec(g);
  const WeightJet<Cd> w = normalize_weight(spec);
  check_requested_q(w, g.q);
  const FormOp<Cd> b0 = b0_leading(w, w.q);
  const FormBasis& basis = form_basis(w.n, w.q);
  json entries = json::array();
  for (int r = 0; r < b0.rows(); ++r)
    for (int c = 0; c < b0.cols(); ++c)
      if (std::abs(b0.at(r, c)) > 0.0)
        entries.push_back({{"from", basis.label(c)}, {"to", basis.label(r)}, {"value", complex_json(b0.at(r, c))}});
  json doc = {{"q", w.q}, {"lambdas", w.lambda}, {"trace", form_trace(b0).real()}, {"entries", entries}};
  if (g.exact) doc["exact"] = {{"pi_n_trace", trace_b0_reduced(normalize_weight_exact(spec)).re.get_str()}};
  return doc;
}

json cmd_b1(const GlobalFlags& g) {
  const WeightSpec spec = load_spec(g);
  const WeightJet<Cd> w = normalize_weight(spec);
  check_requested_q(w, g.q);
  const CConstant<Cd> c = c_constant(w);
  const InvariantTrace<Cd> parts = trace_b1_invariant_parts(w);
  const double pi_n = std::pow(std::numbers::pi, -w.n);
  const double coord = trace_b1_coordinate_reduced(w).real() * pi_n;
  const double inv = parts.reduced.real() * pi_n;
  const double dual = std::fabs(coord - inv) / std::max({std::fabs(coord), std::fabs(inv), 1e-6 * pi_n});
  json doc = {{"q", w.q},
              {"c", {{"closed_form", c.closed_form.real()}, {"hat_route", c.hat_route.real()}, {"discrepancy", c.discrepancy}}},
              {"b1_trace_coordinate", coord},
              {"b1_trace_invariant", inv},
              {"explicit_trace", form_trace(b1_explicit_closed_form(w)).real() * pi_n},
              {"invariant_bracket",
               {{"cubic", parts.cubic.real()},
                {"curvature", parts.curvature.real()},
                {"cross", parts.cross.real()},
                {"q_norm", parts.q_norm.real()}}},
              {"dual_route", dual}};
  if (g.exact) {
    const WeightJet<QComplex> we = normalize_weight_exact(spec);
    doc["exact"] = {{"pi_n_b1_trace_coordinate", trace_b1_coordinate_reduced(we).re.get_str()},
                    {"pi_n_b1_trace_invariant", trace_b1_invariant_reduced(we).re.get_str()},
                    {"c", c_closed_form(we).re.get_str()}};
  }
  const bool c_ok = c.discrepancy <= g.tol || std::abs(c.closed_form - c.hat_route) <= g.tol;
  doc["passed"] = dual <= g.tol && c_ok;
  return doc;
}

json cmd_verify(const GlobalFlags& g, int count, bool fit) {
  ReportOptions opts;
  opts.tol = g.tol;
  opts.exact = g.exact;
  opts.requested_q = g.q;
  opts.with_fit = fit;
  if (g.random.empty() || count <= 1) {
    const ExpansionReport r = run_report(load_spec(g), opts);
    return report_to_json(r);
  }
  json reports = json::array();
  bool all = true;
  for (int i = 0; i < count; ++i) {
    const ExpansionReport r = run_report(load_spec(g, static_cast<std::uint64_t>(i)), opts);
    all = all && r.passed();
    reports.push_back(report_to_json(r));
  }
  return {{"reports", reports}, {"passed", all}};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--k-grid: '" + item + "' is not a number");
    }
  }
  return out;
}

json cmd_fit(const GlobalFlags& g, std::vector<double> k_grid) {
  const WeightSpec spec = load_spec(g);
  if (k_grid.empty()) k_grid = geometric_grid(16.0, 128.0, 8);
  const ExpansionFit fit = bergman_fit_oracle(spec, k_grid);
  const WeightJet<Cd> w = normalize_weight(spec);
  const double expected_b0 = w.abs_det() / std::numbers::pi;
  const double expected_b1 = trace_b1_coordinate(w);
  return {{"k_grid", fit.k_grid},
          {"values", fit.values},
          {"c0", fit.c0},
          {"c1", fit.c1},
          {"c2", fit.c2},
          {"covariance", fit.covariance},
          {"residual_rms", fit.residual_rms},
          {"expected_b0_trace", expected_b0},
          {"expected_b1_trace", expected_b1}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman kernel expansion coefficients for polynomial weights"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_flag("--json", g.json_output, "emit one JSON document instead of a text listing");
  app.add_option("--tol", g.tol, "tolerance for residual checks")->check(CLI::PositiveNumber);
  app.add_flag("--exact", g.exact, "also run the rational pipeline (weights with diagonal Hessian)");
  app.add_option("--seed", g.seed, "seed for --random weights");
  app.add_option("--random", g.random, "use a random normal-form weight with dimension n and q negative eigenvalues")
      ->expected(2);
  app.add_option("--q", g.q, "form degree to expand; must equal the number of negative eigenvalues");

  auto add_spec = [&](CLI::App* sub) { sub->add_option("spec", g.spec_path, "weight spec JSON file, '-' for stdin"); };

  auto* normalize = app.add_subcommand("normalize", "reduce the weight to normal form");
  add_spec(normalize);
  int phase_order = 5;
  auto* phase = app.add_subcommand("phase", "Taylor coefficients of the phase");
  add_spec(phase);
  phase->add_option("--order", phase_order, "total order of the phase jet")->check(CLI::Range(3, 6));
  auto* b0 = app.add_subcommand("b0", "leading amplitude at the point");
  add_spec(b0);
  auto* b1 = app.add_subcommand("b1", "trace of the second coefficient by both routes");
  add_spec(b1);
  int count = 1;
  bool with_fit = false;
  auto* verify = app.add_subcommand("verify", "full pipeline with cross-checks");
  add_spec(verify);
  verify->add_option("--count", count, "number of random weights (with --random)")->check(CLI::PositiveNumber);
  verify->add_flag("--fit", with_fit, "include the radial oracle fit");
  std::string k_grid_text;
  auto* fit = app.add_subcommand("fit", "numerical oracle fit for radial n = 1 weights");
  add_spec(fit);
  fit->add_option("--k-grid", k_grid_text, "comma-separated values of k (at least four)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    json doc;
    if (*normalize) doc = cmd_normalize(g);
    if (*phase) doc = cmd_phase(g, phase_order);
    if (*b0) doc = cmd_b0(g);
    if (*b1) doc = cmd_b1(g);
    if (*verify) doc = cmd_verify(g, count, with_fit);
    if (*fit) doc = cmd_fit(g, parse_grid(k_grid_text));
    emit(g, doc);
    if (doc.contains("passed") && !doc["passed"].get<bool>()) {
      std::cerr << "residual check failed (tol " << g.tol << ")\n";
      return kExitResidual;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const StructuralError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
