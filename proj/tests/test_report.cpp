#include <doctest.h>

#include <fstream>
#include <numbers>

#include "bergman/quadrature.hpp"
#include "bergman/report.hpp"
#include "support.hpp"

using namespace bergman;
using nlohmann::json;

namespace {

json load(const std::string& name) {
  std::ifstream in(std::string(BERGMAN_SPEC_DIR) + "/" + name);
  return json::parse(in);
}

const double kPi = std::numbers::pi;

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
    for (int m : {1, 2, 5, 12, 20}) {
      auto rule = gauss_legendre(m);
      double total = 0.0;
      for (double wgt : rule.weights) total += wgt;
      CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
      for (int d = 0; d <= 2 * m - 1; ++d) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
        const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
        CHECK(std::abs(s - exact) < 1e-14);
      }
    }
    CHECK_THROWS_AS(gauss_legendre(0), ValidationError);
  }

  TEST_CASE("adaptive quadrature converges or reports its tolerance") {
    auto r = adaptive_gauss_legendre([](double x) { return std::exp(-x * x); }, 0.0, 6.0, 1e-14);
    CHECK(r.value == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-14));
    try {
      adaptive_gauss_legendre([](double x) { return std::sin(1e6 * x) + 1.0; }, 0.0, 1.0, 1e-15, 4, 4);
      FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("achieved relative tolerance") != std::string::npos);
    }
  }

  TEST_CASE("spec round trip") {
    for (const char* name : {"gaussian.json", "quartic.json", "mixed_n2.json"}) {
      const auto spec = spec_from_json(load(name));
      const json once = spec_to_json(spec);
      const json twice = spec_to_json(spec_from_json(once));
      CHECK(once == twice);
    }
    testing::Gen gen(5);
    for (const auto& p : testing::randomized_population(12, 42)) {
      const auto spec = spec_from_jet(testing::random_weight(p));
      const json once = spec_to_json(spec);
      CHECK(spec_to_json(spec_from_json(once)) == once);
    }
  }

  TEST_CASE("malformed specs name the offending monomial") {
    try {
      spec_from_json(load("malformed.json"));
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[1]") != std::string::npos);
      CHECK(msg.find("[2]") != std::string::npos);
    }
    CHECK_THROWS_AS(spec_from_json(json::parse(R"({"n": 1, "point": [0, 0]})")), ValidationError);
    CHECK_THROWS_AS(spec_from_json(json::parse(R"({"n": "one", "point": [0, 0], "monomials": []})")), ValidationError);
    CHECK_THROWS_AS(spec_from_json(json::parse(R"([1, 2])")), ValidationError);
  }

  TEST_CASE("Gaussian report") {
    ReportOptions opts;
    opts.exact = true;
    const auto r = run_report(spec_from_json(load("gaussian.json")), opts);
    CHECK(r.b0_trace == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(std::abs(r.b1_trace_coordinate) <= 1e-12);
    CHECK(std::abs(r.b1_trace_invariant) <= 1e-12);
    CHECK(r.c == 0.0);
    for (double res : {r.residuals.phase, r.residuals.transport, r.residuals.dual_route, r.residuals.c_routes})
      CHECK(res <= 1e-12);
    CHECK(r.passed());
    CHECK(*r.exact_b1_trace_reduced == "0");
  }

  TEST_CASE("quartic report") {
    ReportOptions opts;
    opts.exact = true;
    const auto r = run_report(spec_from_json(load("quartic.json")), opts);
    CHECK(r.b1_trace_coordinate == doctest::Approx(0.05 / kPi).epsilon(1e-13));
    CHECK(r.residuals.dual_route <= 1e-9);
    CHECK(*r.exact_b1_trace_reduced == "1/20");
    const json j = report_to_json(r);
    CHECK(j["passed"].get<bool>());
    for (const auto& [key, value] : j["residuals"].items()) {
      CHECK(std::isfinite(value.get<double>()));
      CHECK(value.get<double>() >= 0.0);
    }
    CHECK(j["signature"]["n_minus"] == 0);
  }

  TEST_CASE("a form degree other than n_minus is rejected") {
    ReportOptions opts;
    opts.requested_q = 1;
    CHECK_THROWS_AS(run_report(spec_from_json(load("gaussian.json")), opts), ValidationError);
  }

  TEST_CASE("Gaussian oracle is exact") {
    const auto spec = spec_from_json(load("gaussian.json"));
    const auto grid = geometric_grid(16.0, 128.0, 8);
    const auto fit = bergman_fit_oracle(spec, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(fit.values[i] == doctest::Approx(grid[i] / kPi).epsilon(1e-10));
    CHECK(std::abs(fit.c0 - 1.0 / kPi) <= 1e-10);
    CHECK(std::abs(fit.c1) <= 1e-10);
    CHECK(fit.covariance.size() == 9);
  }

  TEST_CASE("quartic oracle recovers b0 and b1") {
    const auto spec = spec_from_json(load("quartic.json"));
    const auto fit = bergman_fit_oracle(spec, geometric_grid(16.0, 128.0, 8));
    CHECK(std::abs(fit.c0 - 1.0 / kPi) <= 0.005 / kPi);
    CHECK(std::abs(fit.c1 - 0.05 / kPi) <= 0.02 * 0.05 / kPi);
  }

  TEST_CASE("oracle rejections") {
    const auto spec = spec_from_json(load("gaussian.json"));
    CHECK_THROWS_AS(bergman_fit_oracle(spec, {}), ValidationError);
    CHECK_THROWS_AS(bergman_fit_oracle(spec, {16.0, 32.0, 64.0}), ValidationError);
    CHECK_THROWS_AS(bergman_fit_oracle(spec_from_json(load("mixed_n2.json")), geometric_grid(16.0, 128.0, 8)),
                    ValidationError);
    auto shifted = spec;
    shifted.point = {0.1, 0.0};
    CHECK_THROWS_AS(radial_profile(shifted), ValidationError);
    CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 4), ValidationError);
  }

  TEST_CASE("least squares recovers a synthetic expansion") {
    const auto grid = geometric_grid(10.0, 200.0, 9);
    std::vector<double> values;
    for (double k : grid) values.push_back(0.3 * k - 0.7 + 2.5 / k);
    const auto fit = fit_expansion(grid, values);
    CHECK(fit.c0 == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fit.c1 == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.c2 == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(fit.residual_rms < 1e-12);
  }
}
