#include <doctest.h>

#include <fstream>
#include <numbers>

#include "bergman/geometry.hpp"
#include "bergman/report.hpp"
#include "support.hpp"

using namespace bergman;
using testing::mono;

namespace {

WeightJet<Cd> quartic_weight(double delta) {
  PolyJet<Cd> quartic(1, 4);
  quartic.add(mono(1, {2}, {2}), delta);
  return weight_from_normal_form<Cd>({1.0}, quartic);
}

// Column-major unitary acting as a random 2x2 block on (a, a + 1), identity elsewhere.
std::vector<Cd> block_unitary(int n, int a, testing::Gen& gen) {
  std::vector<Cd> u(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) u[j * n + j] = 1.0;
  Cd c = gen.complex(), s = gen.complex();
  const double norm = std::sqrt(std::norm(c) + std::norm(s));
  c /= norm;
  s /= norm;
  const Cd phase = std::polar(1.0, gen.uniform(0.0, 6.0));
  u[a * n + a] = c;
  u[a * n + a + 1] = s;
  u[(a + 1) * n + a] = -std::conj(s) * phase;
  u[(a + 1) * n + a + 1] = std::conj(c) * phase;
  return u;
}

// d^2 phi / dzbar_j dz_k as a z-jet of degree <= 1.
PolyJet<Cd> hessian_entry(const WeightJet<Cd>& w, int j, int k) {
  return PolyJet<Cd>(w.n, truncate<Cd>(jet_diff(jet_diff(w.phi, Block::ZBar, j), Block::Z, k), 1));
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("quadratic weights carry no curvature, Q or trace") {
    for (auto lambda : std::vector<std::vector<double>>{{1.0}, {-1.0, 2.0}, {-2.0, -1.0, 0.5}}) {
      const int n = static_cast<int>(lambda.size());
      auto w = weight_from_normal_form<Cd>(lambda, PolyJet<Cd>(n, 4));
      auto g = geometry_tensors(w);
      for (const auto* table : {&g.theta, &g.theta_curv, &g.q_entries, &g.r_entries, &g.minv_dz, &g.minv_dzbar})
        for (const Cd& v : *table) CHECK(v == Cd(0.0));
      auto t = contraction_values(g, 1.0);
      for (const auto* table : {&t.curvature, &t.dminv_q, &t.r, &t.q_cross})
        for (const Cd& v : *table) CHECK(v == Cd(0.0));
      CHECK(t.q_diag_norm2 == Cd(0.0));
      CHECK(trace_b1_invariant(w) == 0.0);
      CHECK(trace_b1_coordinate(w) == 0.0);
    }
  }

  TEST_CASE("quartic weight: curvature 4 delta") {
    const double delta = 0.05;
    auto w = quartic_weight(delta);
    auto g = geometry_tensors(w);
    CHECK(std::abs(g.theta_curv[g.idx4(0, 0, 0, 0)] - 4.0 * delta) < 1e-15);
    auto t = contraction_values(g, 1.0);
    CHECK(std::abs(t.curvature[0] - 4.0 * delta) < 1e-15);
    CHECK(trace_b1_coordinate(w) == doctest::Approx(delta / std::numbers::pi).epsilon(1e-13));
    CHECK(trace_b1_invariant(w) == doctest::Approx(delta / std::numbers::pi).epsilon(1e-13));
    CHECK(trace_b0_reduced(w) == Cd(1.0));
  }

  TEST_CASE("the per-dimension normalisation recomputes to its frozen value") {
    CHECK(calibrate_unit_normalization() == doctest::Approx(kUnitNormalization).epsilon(1e-12));
    CHECK(calibrate_unit_normalization(0.2) == doctest::Approx(kUnitNormalization).epsilon(1e-12));
  }

  TEST_CASE("Q vanishes inside a single eigenvalue block") {
    for (const auto& p : testing::randomized_population(24, 77)) {
      if (p.q != 0 && p.q != p.n) continue;
      auto g = geometry_tensors(testing::random_weight(p));
      for (double c : g.q_coeff) CHECK(c == 0.0);
      for (const Cd& v : g.q_entries) CHECK(v == Cd(0.0));
      for (int j = 0; j < p.n; ++j)
        for (int k = 0; k < p.n; ++k)
          for (int s = 0; s < p.n; ++s) CHECK(cubic_weight(g, j, k, s) == 0.0);
    }
  }

  TEST_CASE("cubic weights for lambda = (-1, 2)") {
    auto g = geometry_tensors(weight_from_normal_form<Cd>({-1.0, 2.0}, PolyJet<Cd>(2, 4)));
    CHECK(cubic_weight(g, 1, 0, 1) == doctest::Approx(1.0 / 225.0).epsilon(1e-15));
    CHECK(cubic_weight(g, 1, 0, 0) == 0.0);
  }

  TEST_CASE("exact dual route on a mixed-signature weight") {
    std::ifstream in(BERGMAN_SPEC_DIR "/mixed_n2.json");
    const auto spec = spec_from_json(nlohmann::json::parse(in));
    auto we = normalize_weight_exact(spec);
    const QComplex coord = trace_b1_coordinate_reduced(we), inv = trace_b1_invariant_reduced(we);
    CHECK(coord == inv);
    CHECK(coord.re == mpq_class(113, 720));
    CHECK(sgn(coord.im) == 0);
  }

  TEST_CASE("property: jets of the Hessian inverse and the connection") {
    for (const auto& p : testing::randomized_population(18, 21)) {
      auto w = testing::random_weight(p);
      auto g = geometry_tensors(w);
      const int n = p.n;
      // M^{-1} to first order: M0^{-1} - M0^{-1} M1 M0^{-1}, with M0 diagonal
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          auto entry = hessian_entry(w, j, k);
          CHECK(std::abs(g.minv0[g.idx2(j, k)] - (j == k ? Cd(1.0 / w.lambda[j]) : Cd(0.0))) < 1e-15);
          for (int s = 0; s < n; ++s) {
            std::vector<int> e(n, 0);
            e[s] = 1;
            const Cd dz = -entry.coeff(mono(n, {}, e)) / (w.lambda[j] * w.lambda[k]);
            const Cd dzbar = -entry.coeff(mono(n, e, {})) / (w.lambda[j] * w.lambda[k]);
            CHECK(std::abs(g.minv_dz[g.idx3(j, k, s)] - dz) < 1e-14);
            CHECK(std::abs(g.minv_dzbar[g.idx3(j, k, s)] - dzbar) < 1e-14);
            // (M^{-1} dM)_{jk} along dz_s at 0
            CHECK(std::abs(g.theta[g.idx3(j, k, s)] - entry.coeff(mono(n, {}, e)) / w.lambda[j]) < 1e-14);
          }
        }
      // R = curvature - (dbar M^{-1}) Q entrywise
      for (std::size_t i = 0; i < g.r_entries.size(); ++i)
        CHECK(std::abs(g.r_entries[i] - (g.theta_curv[i] - g.dminv_q[i])) < 1e-15);
      // (dbar M^{-1}) Q by direct composition of the tables
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int s = 0; s < n; ++s)
            for (int u = 0; u < n; ++u) {
              Cd acc = 0.0;
              for (int t = 0; t < n; ++t) acc += g.minv_dzbar[g.idx3(k, t, s)] * g.q_entries[g.idx3(t, j, u)];
              CHECK(std::abs(g.dminv_q[g.idx4(k, j, s, u)] - acc) < 1e-14);
            }
      auto tables = contraction_values(g, 1.0);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          CHECK(std::abs(tables.r[j * n + k] - (tables.curvature[j * n + k] - tables.dminv_q[j * n + k])) < 1e-14);
    }
  }

  TEST_CASE("property: q coefficients do not depend on the order inside degenerate groups") {
    testing::Gen gen(12);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3, q = gen.integer(1, 2);
      RandomWeightOptions opt;
      opt.n = n;
      opt.q = q;
      opt.degenerate_pairs = 1;
      auto w = random_normal_weight(opt, 5000 + trial);
      auto g = geometry_tensors(w);
      const int a = q == 1 ? 1 : 0;  // the degenerate pair is (a, a + 1)
      REQUIRE(w.abs_lambda(a) == w.abs_lambda(a + 1));
      auto perm = [&](int i) { return i == a ? a + 1 : (i == a + 1 ? a : i); };
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int s = 0; s < n; ++s)
            CHECK(g.q_coeff[g.idx3(j, k, s)] == doctest::Approx(g.q_coeff[g.idx3(perm(j), perm(k), perm(s))]));
    }
  }

  TEST_CASE("property: dual route, reality and unitary invariance") {
    testing::Gen gen(808);
    for (const auto& p : testing::randomized_population(18, 3030)) {
      CAPTURE(p.n);
      CAPTURE(p.q);
      auto w = testing::random_weight(p);
      const Cd coord = trace_b1_coordinate_reduced(w), inv = trace_b1_invariant_reduced(w);
      CHECK(std::abs(coord.imag()) <= 1e-12);
      CHECK(std::abs(inv.imag()) <= 1e-12);
      CHECK(std::abs(coord - inv) <= 1e-9 * std::max(std::abs(coord), 1e-6));
      // the Q norm term is a squared norm
      CHECK(contraction_values(geometry_tensors(w), 1.0).q_diag_norm2.real() >= 0.0);
    }
    for (auto [n, q] : std::vector<std::pair<int, int>>{{2, 0}, {2, 2}, {3, 1}, {3, 3}, {3, 0}}) {
      RandomWeightOptions opt;
      opt.n = n;
      opt.q = q;
      opt.degenerate_pairs = 1;
      auto w = random_normal_weight(opt, 71 + n * 10 + q);
      const int a = (q == 1) ? 1 : 0;
      REQUIRE(w.abs_lambda(a) == w.abs_lambda(a + 1));
      auto rotated = rotate_weight(w, block_unitary(n, a, gen));
      CHECK(testing::max_diff(rotated.phi, w.phi) > 1e-3);
      CHECK(trace_b1_coordinate(rotated) == doctest::Approx(trace_b1_coordinate(w)).epsilon(1e-10));
      CHECK(trace_b1_invariant(rotated) == doctest::Approx(trace_b1_invariant(w)).epsilon(1e-10));
    }
  }
}
