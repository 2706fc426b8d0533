#include "bergman/report.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "bergman/phase.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/transport.hpp"

namespace bergman {

namespace {

using nlohmann::json;

template <class T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

// Relative difference; magnitudes below `floor` are compared absolutely at that scale.
double discrepancy(double a, double b, double floor = 1e-6) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

}  // namespace

WeightSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("weight spec must be a JSON object");
  WeightSpec spec;
  spec.n = required<int>(j, "n", "spec");
  spec.point = required<std::vector<double>>(j, "point", "spec");
  if (!j.contains("monomials") || !j.at("monomials").is_array())
    throw ValidationError("spec: 'monomials' must be an array");
  int index = 0;
  for (const auto& m : j.at("monomials")) {
    const std::string where = "monomial " + std::to_string(index++);
    WeightTerm t;
    t.alpha = required<std::vector<int>>(m, "alpha", where);
    t.beta = required<std::vector<int>>(m, "beta", where);
    t.re = m.contains("re") ? required<double>(m, "re", where) : 0.0;
    t.im = m.contains("im") ? required<double>(m, "im", where) : 0.0;
    spec.terms.push_back(std::move(t));
  }
  validate_spec(spec);
  return spec;
}

json spec_to_json(const WeightSpec& spec) {
  json monomials = json::array();
  for (const auto& t : spec.terms)
    monomials.push_back({{"alpha", t.alpha}, {"beta", t.beta}, {"re", t.re}, {"im", t.im}});
  return {{"n", spec.n}, {"point", spec.point}, {"monomials", monomials}};
}

double RadialProfile::operator()(double r) const {
  const double r2 = r * r;
  double v = 0.0;
  for (std::size_t m = coeff.size(); m-- > 0;) v = v * r2 + coeff[m];
  return v;
}

RadialProfile radial_profile(const WeightSpec& spec) {
  validate_spec(spec);
  if (spec.n != 1) throw ValidationError("unsupported: the radial oracle needs n = 1");
  if (spec.point[0] != 0.0 || spec.point[1] != 0.0)
    throw ValidationError("unsupported: the radial oracle evaluates at the origin; point must be (0, 0)");
  RadialProfile p;
  for (const auto& t : spec.terms) {
    if (t.alpha[0] != t.beta[0])
      throw ValidationError("unsupported: non-radial monomial zbar^" + std::to_string(t.alpha[0]) + " z^" +
                            std::to_string(t.beta[0]));
    const auto m = static_cast<std::size_t>(t.alpha[0]);
    if (p.coeff.size() <= m) p.coeff.resize(m + 1, 0.0);
    p.coeff[m] += t.re;
  }
  if (p.coeff.size() < 2 || p.coeff[1] <= 0.0)
    throw ValidationError("unsupported: the radial oracle needs a strictly subharmonic weight at 0 (q = 0)");
  if (p.coeff.back() <= 0.0) throw ValidationError("unsupported: the weight must grow at infinity");
  p.coeff[0] = 0.0;
  return p;
}

double radial_norm_squared(const RadialProfile& phi, double k, double rel_tol) {
  if (!(k > 0.0)) throw ValidationError("k must be positive");
  auto integrand = [&](double r) { return r * std::exp(-2.0 * k * phi(r)); };
  // Walk outwards until the integrand has dropped 1e-16 below the largest
  // value seen and keeps decreasing.
  double peak = 0.0, radius = 0.05 / std::sqrt(k);
  double previous = 0.0;
  for (int step = 0; step < 4000; ++step) {
    const double v = integrand(radius);
    peak = std::max(peak, v);
    if (v < 1e-16 * peak && v <= previous) break;
    previous = v;
    radius *= 1.05;
  }
  const auto res = adaptive_gauss_legendre(integrand, 0.0, radius, rel_tol, 20, 1 << 14);
  return 4.0 * std::numbers::pi * res.value;
}

double bergman_diagonal_oracle(const RadialProfile& phi, double k, double rel_tol) {
  return 1.0 / radial_norm_squared(phi, k, rel_tol);
}

ExpansionFit fit_expansion(const std::vector<double>& k_grid, const std::vector<double>& values) {
  if (k_grid.size() != values.size()) throw ValidationError("fit: grid and values differ in length");
  if (k_grid.size() < 4) throw ValidationError("fit: k_grid needs at least 4 points");
  const int m = static_cast<int>(k_grid.size());
  Eigen::MatrixXd A(m, 3);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    A(i, 0) = k_grid[i];
    A(i, 1) = 1.0;
    A(i, 2) = 1.0 / k_grid[i];
    b(i) = values[i];
  }
  const Eigen::Vector3d x = A.colPivHouseholderQr().solve(b);
  ExpansionFit fit;
  fit.k_grid = k_grid;
  fit.values = values;
  fit.c0 = x(0);
  fit.c1 = x(1);
  fit.c2 = x(2);
  const Eigen::VectorXd res = A * x - b;
  fit.residual_rms = std::sqrt(res.squaredNorm() / m);
  const double variance = res.squaredNorm() / std::max(1, m - 3);
  const Eigen::Matrix3d cov = variance * (A.transpose() * A).inverse();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) fit.covariance.push_back(cov(r, c));
  return fit;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw ValidationError("geometric grid needs 0 < lo < hi and 2+ points");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return out;
}

ExpansionFit bergman_fit_oracle(const WeightSpec& spec, const std::vector<double>& k_grid, double rel_tol) {
  if (k_grid.size() < 4) throw ValidationError("fit: k_grid needs at least 4 points");
  const RadialProfile phi = radial_profile(spec);
  std::vector<std::future<double>> jobs;
  for (double k : k_grid)
    jobs.push_back(std::async(std::launch::async, [&phi, k, rel_tol] { return bergman_diagonal_oracle(phi, k, rel_tol); }));
  std::vector<double> values;
  for (auto& job : jobs) values.push_back(job.get());
  return fit_expansion(k_grid, values);
}

bool ExpansionReport::passed() const {
  for (double r : {residuals.phase, residuals.transport, residuals.dual_route, residuals.c_routes})
    if (!std::isfinite(r) || r > tol) return false;
  return true;
}

void check_requested_q(const WeightJet<Cd>& w, const std::optional<int>& requested_q) {
  if (!requested_q || *requested_q == w.q) return;
  std::ostringstream os;
  os << "requested q = " << *requested_q << " but the Hessian has n_- = " << w.q
     << " negative eigenvalues; the Bergman projection on (0," << *requested_q
     << ")-forms is O(k^-infinity) unless q = n_-, so there is no expansion to compute";
  throw ValidationError(os.str());
}

ExpansionReport run_report(const WeightSpec& spec, const ReportOptions& opts) {
  validate_spec(spec);
  const WeightJet<Cd> w = normalize_weight(spec);
  check_requested_q(w, opts.requested_q);

  ExpansionReport r;
  r.tol = opts.tol;
  r.lambdas = w.lambda;
  r.q = w.q;
  r.n_minus = w.n_minus();
  r.n_plus = w.n_plus();
  const double pi_n = std::pow(std::numbers::pi, -w.n);
  r.b0_trace = w.abs_det() * pi_n;

  const PhaseJet<Cd> psi = phase_solve_recursive(w, 5);
  r.residuals.phase = phase_residual(w, psi, 4);
  const AmplitudeSolution<Cd> amp = transport_solve_recursive(w, psi, 2);
  const TransportResiduals tr = transport_residuals(w, psi.psi, amp.b0);
  r.residuals.transport = std::max({tr.order1, tr.order2, tr.self_adjoint, tr.trace_derivative});

  const CConstant<Cd> c = c_constant(w);
  r.c = c.closed_form.real();
  r.residuals.c_routes = discrepancy(r.c, c.hat_route.real()) + std::fabs(c.hat_route.imag());

  const Cd coord = trace_b1_coordinate_reduced(w), inv = trace_b1_invariant_reduced(w);
  r.b1_trace_coordinate = coord.real() * pi_n;
  r.b1_trace_invariant = inv.real() * pi_n;
  r.residuals.dual_route =
      discrepancy(coord.real(), inv.real()) + std::max(std::fabs(coord.imag()), std::fabs(inv.imag()));

  if (opts.exact) {
    const WeightJet<QComplex> we = normalize_weight_exact(spec);
    const QComplex ec = trace_b1_coordinate_reduced(we), ei = trace_b1_invariant_reduced(we);
    r.exact_b1_trace_reduced = ec.re.get_str();
    if (!(ec == ei)) r.residuals.dual_route = std::max(r.residuals.dual_route, discrepancy(ec.re.get_d(), ei.re.get_d()));
  }

  if (opts.with_fit) {
    OracleSummary o;
    o.fit = bergman_fit_oracle(spec, opts.k_grid.empty() ? geometric_grid(16.0, 128.0, 8) : opts.k_grid);
    o.fitted_b0 = o.fit.c0;
    o.fitted_b1 = o.fit.c1;
    o.relative_errors = {discrepancy(o.fitted_b0, r.b0_trace), discrepancy(o.fitted_b1, r.b1_trace_coordinate)};
    r.oracle = o;
  }
  return r;
}

json report_to_json(const ExpansionReport& r) {
  json out = {
      {"lambdas", r.lambdas},
      {"signature", {{"n_minus", r.n_minus}, {"n_plus", r.n_plus}}},
      {"q", r.q},
      {"b0_trace", r.b0_trace},
      {"b1_trace_coordinate", r.b1_trace_coordinate},
      {"b1_trace_invariant", r.b1_trace_invariant},
      {"c", r.c},
      {"residuals",
       {{"phase", r.residuals.phase},
        {"transport", r.residuals.transport},
        {"dual_route", r.residuals.dual_route},
        {"c_routes", r.residuals.c_routes}}},
      {"tol", r.tol},
      {"passed", r.passed()},
  };
  if (r.exact_b1_trace_reduced) out["exact"] = {{"pi_n_b1_trace", *r.exact_b1_trace_reduced}};
  if (r.oracle) {
    const auto& o = *r.oracle;
    out["oracle_fit"] = {{"k_grid", o.fit.k_grid},
                         {"values", o.fit.values},
                         {"fitted_b0", o.fitted_b0},
                         {"fitted_b1", o.fitted_b1},
                         {"c2", o.fit.c2},
                         {"covariance", o.fit.covariance},
                         {"residual_rms", o.fit.residual_rms},
                         {"relative_errors", o.relative_errors}};
  }
  return out;
}

}  // namespace bergman
