// Pipeline orchestration, JSON I/O and the numerical oracle for radial weights.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman/geometry.hpp"
#include "bergman/weight.hpp"

namespace bergman {

// ---- WeightSpec <-> JSON ----------------------------------------------------

// {"n": 1, "point": [0, 0], "monomials": [{"alpha": [1], "beta": [1], "re": 1, "im": 0}]}
WeightSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const WeightSpec& spec);

// ---- radial oracle ----------------------------------------------------------

// phi(r) = sum_m coeff[m] r^{2m}, with the constant term removed.
struct RadialProfile {
  std::vector<double> coeff;
  double operator()(double r) const;
};

// Checks that the spec is n = 1, centred at 0, depends on |z|^2 only and is
// strictly subharmonic at 0 with a positive leading coefficient.
RadialProfile radial_profile(const WeightSpec& spec);

// ||1||_k^2 = 4 pi int_0^infty r exp(-2 k phi(r)) dr, cut where the integrand
// is below 1e-16 of its peak.
double radial_norm_squared(const RadialProfile& phi, double k, double rel_tol = 1e-14);

// Pi_k(0,0) = 1 / ||1||_k^2.
double bergman_diagonal_oracle(const RadialProfile& phi, double k, double rel_tol = 1e-14);

struct ExpansionFit {
  std::vector<double> k_grid;
  std::vector<double> values;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  std::vector<double> covariance;  // 3x3 row-major, residual variance times (A^T A)^{-1}
  double residual_rms = 0.0;
};

// Least squares of values against c0 k + c1 + c2 / k.
ExpansionFit fit_expansion(const std::vector<double>& k_grid, const std::vector<double>& values);

// `count` points spaced geometrically from lo to hi.
std::vector<double> geometric_grid(double lo, double hi, int count);

// Oracle values on the grid (evaluated concurrently) and the fit.  Throws
// ValidationError for fewer than four grid points or unsupported weights.
ExpansionFit bergman_fit_oracle(const WeightSpec& spec, const std::vector<double>& k_grid, double rel_tol = 1e-14);

// ---- full report ------------------------------------------------------------

struct ReportOptions {
  double tol = 1e-9;
  bool exact = false;
  std::optional<int> requested_q;
  bool with_fit = false;
  std::vector<double> k_grid;  // defaults to geometric_grid(16, 128, 8)
};

struct Residuals {
  double phase = 0.0;
  double transport = 0.0;
  double dual_route = 0.0;
  double c_routes = 0.0;
};

struct OracleSummary {
  ExpansionFit fit;
  double fitted_b0 = 0.0;
  double fitted_b1 = 0.0;
  std::vector<double> relative_errors;  // b0 and b1 against the expansion
};

struct ExpansionReport {
  std::vector<double> lambdas;
  int n_minus = 0, n_plus = 0;
  int q = 0;
  double b0_trace = 0.0;
  double b1_trace_coordinate = 0.0;
  double b1_trace_invariant = 0.0;
  double c = 0.0;
  Residuals residuals;
  double tol = 1e-9;
  std::optional<std::string> exact_b1_trace_reduced;  // pi^n Tr b1 as a fraction
  std::optional<OracleSummary> oracle;

  bool passed() const;
};

// Rejects a requested q different from n_- with ValidationError.
void check_requested_q(const WeightJet<Cd>& w, const std::optional<int>& requested_q);

ExpansionReport run_report(const WeightSpec& spec, const ReportOptions& opts);
nlohmann::json report_to_json(const ExpansionReport& r);

// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitResidual = 3, kExitNumerical = 4 };

}  // namespace bergman
