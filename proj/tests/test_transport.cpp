#include <doctest.h>

#include <numbers>

#include "bergman/transport.hpp"
#include "support.hpp"

using namespace bergman;
using testing::contract;
using testing::mono;
using testing::wedge;

namespace {

WeightJet<Cd> single_cubic(const Mono& m, Cd coeff) {
  PolyJet<Cd> higher(2, 4);
  higher.add(m, coeff);
  auto idx = PolyJet<Cd>::split(2, m);
  higher.add(mono(2, idx[1].e, idx[0].e), std::conj(coeff));
  return weight_from_normal_form<Cd>({-1.0, 2.0}, higher);
}

// Sub-block entry of a FormOp in C^2 on 1-forms, J and K given as 1-based indices.
Cd entry(const FormOp<Cd>& f, int J, int K) { return f.basis_coeff(1u << (J - 1), 1u << (K - 1)); }

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("leading amplitude for lambda = 2") {
    auto w = weight_from_normal_form<Cd>({2.0}, PolyJet<Cd>(1, 4));
    auto b0 = b0_leading(w, 0);
    CHECK(b0.rows() == 1);
    CHECK(std::abs(b0.at(0, 0) - 2.0 / std::numbers::pi) < 1e-15);
  }

  TEST_CASE("leading amplitude for lambda = (-1, 2)") {
    auto w = weight_from_normal_form<Cd>({-1.0, 2.0}, PolyJet<Cd>(2, 4));
    auto b0 = b0_leading(w, 1);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(entry(b0, 1, 1) - 2.0 / pi2) < 1e-15);
    CHECK(std::abs(form_trace(b0) - 2.0 / pi2) < 1e-15);
    auto proj = compose(wedge(0, 2, 0), contract(0, 2, 0));
    CHECK(testing::max_diff(b0, Cd(2.0 / pi2) * proj) < 1e-15);
    CHECK_THROWS_AS(b0_leading(w, 0), ValidationError);
  }

  TEST_CASE("property: trace of the leading amplitude is pi^-n (-1)^q det") {
    for (const auto& p : testing::randomized_population(18, 31)) {
      auto w = testing::random_weight(p);
      double det = 1.0;
      for (double l : w.lambda) det *= l;
      if (p.q % 2) det = -det;
      CHECK(form_trace(b0_leading(w, w.q)).real() == doctest::Approx(det * std::pow(std::numbers::pi, -p.n)).epsilon(1e-14));
      CHECK(signed_hessian_determinant(w, 2).coeff(Mono{}).real() == doctest::Approx(det).epsilon(1e-13));
    }
  }

  TEST_CASE("L_solve divides by the L eigenvalue") {
    auto w = weight_from_normal_form<Cd>({-1.0, 2.0}, PolyJet<Cd>(2, 4));
    SignTables<Cd> st(w);
    CHECK(st.F(0b10) == 6.0);
    FormOpJet<Cd> a(2, 1, 1, 2);
    a.basis_entry(0b01, 0b10) = testing::term(2, 2, mono(2, {}, {1, 0}), 1.0);
    auto res = L_solve(a, st);
    auto expect = a;
    expect *= Cd(1.0 / 8.0);
    CHECK(testing::max_diff(res.solution, expect) < 1e-16);
    CHECK(max_abs(res.kernel_part) == 0.0);

    FormOpJet<Cd> k(2, 1, 1, 2);
    k.basis_entry(0b01, 0b01) = testing::term(2, 2, mono(2, {1, 0}, {}), 1.0);
    CHECK_THROWS_AS(L_solve(k, st), TransportError);
    auto allowed = L_solve(k, st, true);
    CHECK(testing::max_diff(allowed.kernel_part, k) == 0.0);

    auto zero = L_solve(FormOpJet<Cd>(2, 1, 1, 2), st);
    CHECK(max_abs(zero.solution) == 0.0);
  }

  TEST_CASE("property: L_solve inverts L off its kernel (n <= 3, degree <= 2)") {
    const std::vector<std::vector<double>> spectra{{1.5}, {-0.7}, {-1.0, 2.0}, {0.5, 1.25}, {-2.0, -0.5},
                                                   {-1.0, 0.5, 3.0}, {-2.0, -1.5, 0.25}, {0.5, 0.75, 2.0}, {-3.0, -2.0, -1.0}};
    for (const auto& lambda : spectra) {
      const int n = static_cast<int>(lambda.size());
      auto w = weight_from_normal_form<Cd>(lambda, PolyJet<Cd>(n, 4));
      SignTables<Cd> st(w);
      for (int q = 0; q <= n; ++q) {
        FormOpJet<Cd> b(n, q, q, 2);
        for (int r = 0; r < b.rows(); ++r)
          for (int c = 0; c < b.cols(); ++c)
            for (int d = 0; d <= 2; ++d)
              for_each_monomial(all_jet_vars(n), d, [&](const Mono& m) { b.at(r, c).add(m, Cd(1.0 + r, c - d)); });
        auto res = L_solve(b, st, true);
        CHECK(testing::max_diff(L_apply(res.solution, st) + res.kernel_part, b) < 1e-13);
        CHECK(max_abs(L_solve(L_apply(b, st), st).kernel_part) < 1e-13);
        CHECK(testing::max_diff(L_solve(L_apply(res.solution, st), st).solution, res.solution) < 1e-13);
      }
    }
  }

  TEST_CASE("first order amplitude for zbar2 z1 z1") {
    const Cd gamma(0.6, 0.2);
    auto w = single_cubic(mono(2, {0, 1}, {2, 0}), gamma / 2.0);
    auto b0 = b0_leading_reduced(w, 1);
    auto b01 = b01_closed_form(w);
    const auto first = compose(contract(0, 2, 1), compose(wedge(1, 2, 1), b0));
    const auto fourth = compose(b0, compose(contract(1, 2, 1), wedge(0, 2, 1)));
    CHECK(std::abs(entry(first, 1, 2)) > 0.0);
    CHECK(std::abs(entry(fourth, 2, 1)) > 0.0);
    const auto z1 = testing::coefficient_of(b01, mono(2, {}, {1, 0}));
    const auto zbar1 = testing::coefficient_of(b01, mono(2, {1, 0}, {}));
    CHECK(std::abs(entry(z1, 1, 2) - gamma / 4.0 * entry(first, 1, 2)) < 1e-14);
    CHECK(std::abs(entry(zbar1, 2, 1) - std::conj(gamma) / 12.0 * entry(fourth, 2, 1)) < 1e-14);
  }

  TEST_CASE("first order amplitude for zbar2 z2 z2") {
    const Cd gamma(0.9, -0.3);
    auto w = single_cubic(mono(2, {0, 1}, {0, 2}), gamma / 2.0);
    auto b0 = b0_leading_reduced(w, 1);
    const auto z2 = testing::coefficient_of(b01_closed_form(w), mono(2, {}, {0, 1}));
    CHECK(std::abs(entry(z2, 1, 1) - gamma / 2.0 * entry(b0, 1, 1)) < 1e-14);
  }

  TEST_CASE("quadratic weights have no corrections") {
    auto w = weight_from_normal_form<Cd>({-1.0, 2.0}, PolyJet<Cd>(2, 4));
    auto psi = phase_solve_recursive(w, 5);
    CHECK(max_abs(b01_closed_form(w)) == 0.0);
    CHECK(max_abs(b02_diag_closed_form(w, psi.psi).family) == 0.0);
    CHECK(max_abs(b1_explicit_closed_form(w)) == 0.0);
    auto amp = transport_solve_recursive(w, psi, 2);
    CHECK(max_abs(homogeneous_part(amp.b0, 1)) == 0.0);
    CHECK(max_abs(homogeneous_part(amp.b0, 2)) == 0.0);
  }

  TEST_CASE("second order family and b1 for zbar2 z1 z1") {
    const Cd gamma(0.6, 0.2);
    const double g2 = std::norm(gamma);
    auto w = single_cubic(mono(2, {0, 1}, {2, 0}), gamma / 2.0);
    auto psi = phase_solve_recursive(w, 5);
    auto b0 = b0_leading_reduced(w, 1);
    const auto sandwich =
        compose(compose(contract(0, 2, 1), wedge(1, 2, 1)), compose(b0, compose(contract(1, 2, 1), wedge(0, 2, 1))));
    CHECK(std::abs(entry(sandwich, 2, 2) - 2.0) < 1e-15);

    auto fam = b02_diag_closed_form(w, psi.psi);
    CHECK(fam.unknown_remainder);
    const auto z1z1 = testing::coefficient_of(fam.family, mono(2, {1, 0}, {1, 0}));
    // the (1, 1) entry also collects the diagonal quartic phase terms
    const Cd quartic =
        Cd(0.0, 0.5) * (diagonal_quartic_from_jet(psi.psi, 0, 0) + diagonal_quartic_from_jet(psi.psi, 0, 1));
    CHECK(std::abs(quartic) > 1e-3);
    CHECK(std::abs(entry(z1z1, 1, 1) - (g2 / 4.0 + quartic) * entry(b0, 1, 1)) < 1e-14);
    CHECK(std::abs(entry(z1z1, 2, 2) - g2 / 48.0 * entry(sandwich, 2, 2)) < 1e-14);

    auto explicit_b1 = b1_explicit_closed_form(w);
    CHECK(testing::max_diff(explicit_b1, Cd(g2 / 288.0) * sandwich) < 1e-15);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(form_trace(explicit_b1) / pi2 - g2 / 288.0 * 2.0 / pi2) < 1e-15);
  }

  TEST_CASE("property: transport residuals, self-adjointness and trace identity") {
    for (const auto& p : testing::randomized_population(18, 1234)) {
      CAPTURE(p.n);
      CAPTURE(p.q);
      CAPTURE(p.seed);
      auto w = testing::random_weight(p);
      auto psi = phase_solve_recursive(w, 5);
      auto amp = transport_solve_recursive(w, psi, 2);
      auto res = transport_residuals(w, psi.psi, amp.b0);
      CHECK(res.order1 <= 1e-10);
      CHECK(res.order2 <= 1e-10);
      CHECK(res.self_adjoint <= 1e-12);
      CHECK(res.trace_derivative <= 1e-10);
      // the closed-form first order jet is the solver's
      CHECK(testing::max_diff(homogeneous_part(amp.b0, 1), b01_closed_form(w)) <= 1e-12);
      CHECK(testing::max_diff(adjoint_swap(b01_closed_form(w)), b01_closed_form(w)) <= 1e-12);
      // the explicit part of b1 carries the trace forced by the transport equation
      CHECK(std::abs(form_trace(b1_explicit_closed_form(w)) - amp.b1_trace_known) <= 1e-10);
      // a corrupted amplitude is caught
      auto broken = amp.b0;
      broken.at(0, 0).add(mono(p.n, {}, std::vector<int>(1, 1)), 1e-4);
      auto bad = transport_residuals(w, psi.psi, broken);
      CHECK(std::max({bad.order1, bad.self_adjoint, bad.trace_derivative}) > 1e-8);
    }
  }
}
