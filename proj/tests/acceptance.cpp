// Acceptance run: one PASS/FAIL line per criterion, with the measured worst
// values and wall time.  Exit status is the number of failed criteria.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "bergman/report.hpp"
#include "support.hpp"

using namespace bergman;

namespace {

constexpr int kPopulation = 50;
constexpr std::uint64_t kSeed = 20240611;
const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

WeightSpec load_spec(const std::string& name) {
  std::ifstream in(std::string(BERGMAN_SPEC_DIR) + "/" + name);
  return spec_from_json(nlohmann::json::parse(in));
}

void gaussian_exactness(Outcome& out) {
  const WeightSpec spec = load_spec("gaussian.json");
  const auto r = run_report(spec, {});
  const auto grid = geometric_grid(16.0, 128.0, 8);
  const auto fit = bergman_fit_oracle(spec, grid);
  double worst_oracle = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst_oracle = std::max(worst_oracle, std::fabs(fit.values[i] - grid[i] / kPi) / (grid[i] / kPi));
  const double b0_err = std::fabs(r.b0_trace - 1.0 / kPi);
  const double b1 = std::max(std::fabs(r.b1_trace_coordinate), std::fabs(r.b1_trace_invariant));
  out.detail << "b0 err " << b0_err << ", |Tr b1| " << b1 << ", oracle rel err " << worst_oracle;
  out.require(b0_err <= 1e-12, "b0_trace");
  out.require(b1 <= 1e-12, "Tr b1");
  out.require(worst_oracle <= 1e-10, "oracle k/pi");
}

void quartic_check(Outcome& out) {
  const double delta = 0.05;
  const WeightSpec spec = load_spec("quartic.json");
  const WeightJet<Cd> w = normalize_weight(spec);
  const double coord = trace_b1_coordinate(w);
  const auto fit = bergman_fit_oracle(spec, geometric_grid(16.0, 128.0, 8));
  const auto c = c_constant(w);
  const double coord_err = std::fabs(coord - delta / kPi) / (delta / kPi);
  const double fit_err = std::fabs(fit.c1 - delta / kPi) / (delta / kPi);
  const double c_err = std::max(std::abs(c.closed_form - delta), std::abs(c.hat_route - delta));
  out.detail << "Tr b1 rel err " << coord_err << ", fitted b1 rel err " << fit_err << ", c err " << c_err;
  out.require(coord_err <= 1e-12, "trace_b1_coordinate");
  out.require(fit_err <= 0.02, "oracle c1");
  out.require(c_err <= 1e-10, "c routes");
}

void phase_suite(Outcome& out) {
  double residual = 0.0, order3 = 0.0, quartic = 0.0;
  for (const auto& p : testing::randomized_population(kPopulation, kSeed)) {
    const auto w = testing::random_weight(p);
    const auto solved = phase_solve_recursive(w, 5);
    const auto closed = phase_closed_form(w);
    residual = std::max(residual, phase_residual(w, solved, 4));
    order3 = std::max(order3, max_abs<Cd>(homogeneous_part<Cd>(solved.psi, 3) - homogeneous_part<Cd>(closed.psi, 3)));
    for (const auto& [jk, v] : diagonal_quartic_closed_form(w))
      quartic = std::max(quartic, std::abs(v - diagonal_quartic_from_jet(solved.psi, jk.first, jk.second)));
  }
  out.detail << "residual " << residual << ", order-3 gap " << order3 << ", diagonal order-4 gap " << quartic;
  out.require(residual <= 1e-10, "phase residual");
  out.require(order3 <= 1e-10, "order 3 agreement");
  out.require(quartic <= 1e-10, "diagonal order 4 agreement");
}

void transport_suite(Outcome& out) {
  TransportResiduals worst;
  for (const auto& p : testing::randomized_population(kPopulation, kSeed)) {
    const auto w = testing::random_weight(p);
    const auto psi = phase_solve_recursive(w, 5);
    const auto amp = transport_solve_recursive(w, psi, 2);
    const auto r = transport_residuals(w, psi.psi, amp.b0);
    worst.order1 = std::max(worst.order1, r.order1);
    worst.order2 = std::max(worst.order2, r.order2);
    worst.self_adjoint = std::max(worst.self_adjoint, r.self_adjoint);
    worst.trace_derivative = std::max(worst.trace_derivative, r.trace_derivative);
  }
  out.detail << "order1 " << worst.order1 << ", order2 " << worst.order2 << ", self-adjoint " << worst.self_adjoint
             << ", trace derivative " << worst.trace_derivative;
  out.require(worst.order1 <= 1e-10 && worst.order2 <= 1e-10, "transport residual");
  out.require(worst.self_adjoint <= 1e-12, "self-adjointness");
  out.require(worst.trace_derivative <= 1e-10, "trace derivative");
}

void dual_route(Outcome& out) {
  const double calibrated = calibrate_unit_normalization();
  double worst = 0.0;
  for (const auto& p : testing::randomized_population(kPopulation, kSeed)) {
    const auto w = testing::random_weight(p);
    const double coord = trace_b1_coordinate(w), inv = trace_b1_invariant(w);
    worst = std::max(worst, std::fabs(coord - inv) / std::max({std::fabs(coord), std::fabs(inv), 1e-300}));
  }
  out.detail << "calibrated constant " << calibrated << " (frozen " << kUnitNormalization << "), worst rel gap " << worst;
  out.require(std::fabs(calibrated - kUnitNormalization) <= 1e-12, "calibration");
  out.require(worst <= 1e-9, "dual route");
}

void stationary_engine(Outcome& out) {
  double quad = 0.0;
  for (const auto& f : testing::gaussian_phase_family())
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b) quad = std::max(quad, testing::stationary_phase_gap(f, a, b, 32.0));
  double generic = 0.0;
  for (const auto& p : testing::randomized_population(kPopulation, kSeed)) {
    const auto w = testing::random_weight(p);
    const auto psi = phase_solve_recursive(w, 5);
    const auto amp = transport_solve_recursive(w, psi, 2);
    const auto g = C0_generic(w, psi.psi, amp.b0);
    const auto v = C0_value(w, psi.psi, amp.b0).total();
    generic = std::max(generic, max_abs(g - v) / std::max(1.0, max_abs(g)));
  }
  out.detail << "quadrature rel gap " << quad << ", generic L1 vs five sums " << generic;
  out.require(quad <= 1e-6, "stationary phase vs quadrature");
  out.require(generic <= 1e-9, "generic L1");
}

void invariance_suite(Outcome& out) {
  double imag = 0.0;
  for (const auto& p : testing::randomized_population(kPopulation, kSeed)) {
    const auto w = testing::random_weight(p);
    imag = std::max({imag, std::fabs(trace_b1_coordinate_reduced(w).imag()),
                     std::fabs(trace_b1_invariant_reduced(w).imag())});
  }
  testing::Gen gen(kSeed);
  double unitary = 0.0;
  for (int n = 2; n <= 3; ++n)
    for (int q = 0; q <= n; ++q)
      for (int trial = 0; trial < 3; ++trial) {
        RandomWeightOptions opt;
        opt.n = n;
        opt.q = q;
        opt.degenerate_pairs = 1;
        const auto w = random_normal_weight(opt, kSeed + 100 * n + 10 * q + trial);
        int a = -1;
        for (int j = 0; j + 1 < n; ++j)
          if (w.lambda[j] == w.lambda[j + 1]) a = j;
        if (a < 0) continue;
        std::vector<Cd> u(static_cast<std::size_t>(n) * n, 0.0);
        for (int j = 0; j < n; ++j) u[j * n + j] = 1.0;
        Cd c = gen.complex(), s = gen.complex();
        const double norm = std::hypot(std::abs(c), std::abs(s));
        c /= norm;
        s /= norm;
        u[a * n + a] = c;
        u[a * n + a + 1] = s;
        u[(a + 1) * n + a] = -std::conj(s);
        u[(a + 1) * n + a + 1] = std::conj(c);
        const auto rotated = rotate_weight(w, u);
        for (auto route : {trace_b1_coordinate, trace_b1_invariant}) {
          const double before = route(w), after = route(rotated);
          unitary = std::max(unitary, std::fabs(after - before) / std::max(std::fabs(before), 1e-300));
        }
      }
  double quadratic = 0.0;
  for (const auto& p : testing::randomized_population(10, kSeed)) {
    RandomWeightOptions opt;
    opt.n = p.n;
    opt.q = p.q;
    opt.cubic = false;
    opt.quartic = false;
    const auto w = random_normal_weight(opt, p.seed);
    quadratic = std::max({quadratic, std::fabs(trace_b1_coordinate(w)), std::fabs(trace_b1_invariant(w))});
  }
  out.detail << "max |Im| " << imag << ", unitary rel change " << unitary << ", quadratic |Tr b1| " << quadratic;
  out.require(imag <= 1e-12, "reality");
  out.require(unitary <= 1e-10, "unitary invariance");
  out.require(quadratic <= 1e-12, "quadratic weights");
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 for no runtime requirement
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "Gaussian exactness", 1.0, gaussian_exactness},
      {2, "quartic quantitative check", 10.0, quartic_check},
      {3, "phase suite", 30.0, phase_suite},
      {4, "transport suite", 30.0, transport_suite},
      {5, "dual-route equality", 0.0, dual_route},
      {6, "stationary-phase engine", 0.0, stationary_engine},
      {7, "invariance suite", 0.0, invariance_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
      out.pass = false;
      out.detail << " [over the " << c.budget_seconds << " s budget]";
    }
    if (!out.pass) ++failed;
    std::printf("%s criterion %d: %s (%.3f s) %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                out.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed;
}
