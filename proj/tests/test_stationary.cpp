#include <doctest.h>

#include <numbers>

#include "bergman/stationary.hpp"
#include "support.hpp"

using namespace bergman;
using testing::mono;

namespace {

const Cd I(0.0, 1.0);

Poly<Cd> real_monomial(int a, int b) {
  Poly<Cd> u(2, 4);
  Mono m;
  m.set(0, a);
  m.set(1, b);
  u.add(m, 1.0);
  return u;
}

}  // namespace

TEST_SUITE("stationary") {
  TEST_CASE("first corrector on the standard Gaussian") {
    auto phase = make_real_phase(testing::gaussian_phase(1.0, 0.0, 0.0));
    CHECK(phase.remainder.empty());
    CHECK(std::abs(hormander_Lj(phase, real_monomial(0, 0), 1, 2)) == 0.0);
    Poly<Cd> r2 = real_monomial(2, 0) + real_monomial(0, 2);
    CHECK(std::abs(hormander_Lj(phase, r2, 1, 2) - 1.0) < 1e-15);
    CHECK(std::abs(hormander_Lj(phase, real_monomial(0, 0), 0, 0) - 1.0) < 1e-15);
    for (double k : {4.0, 32.0}) {
      const double pi = std::numbers::pi;
      CHECK(std::abs(stationary_phase_sum(phase, r2, 2, k, 1) - 2.0 * pi / (k * k)) < 1e-14);
      CHECK(std::abs(stationary_phase_sum(phase, real_monomial(0, 0), 0, k, 0) - 2.0 * pi / k) < 1e-14);
    }
  }

  TEST_CASE("phase validation") {
    PolyJet<Cd> linear(1, 4);
    linear.add(mono(1, {}, {1}), 1.0);
    CHECK_THROWS_AS(make_real_phase(linear), ValidationError);
    auto phase = make_real_phase(testing::gaussian_phase(1.0, 0.0, 0.0));
    CHECK_THROWS_AS(hormander_Lj(phase, real_monomial(2, 0), 1, 1), ValidationError);
    CHECK_THROWS_AS(hormander_Lj(phase, real_monomial(0, 0), 3, 4), ValidationError);
    PolyJet<Cd> second_point(1, 4);
    second_point.add(mono(1, {}, {}, {1}, {1}), 1.0);
    CHECK_THROWS_AS(to_real_coordinates(second_point), StructuralError);
  }

  TEST_CASE("stationary phase matches quadrature for Gaussian phases (k = 32, degree <= 4)") {
    for (const auto& f : testing::gaussian_phase_family())
      for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b) {
          CAPTURE(a);
          CAPTURE(b);
          CHECK(testing::stationary_phase_gap(f, a, b, 32.0) <= 1e-6);
        }
  }

  TEST_CASE("quadratic weight: C0 vanishes and c = 0") {
    auto w = weight_from_normal_form<Cd>({-1.0, 2.0}, PolyJet<Cd>(2, 4));
    auto psi = phase_solve_recursive(w, 5);
    auto amp = transport_solve_recursive(w, psi, 2);
    CHECK(max_abs(C0_value(w, psi.psi, amp.b0).total()) < 1e-15);
    CHECK(max_abs(C0_generic(w, psi.psi, amp.b0)) < 1e-15);
    auto c = c_constant(w);
    CHECK(std::abs(c.closed_form) == 0.0);
    CHECK(std::abs(c.hat_route) < 1e-15);
  }

  TEST_CASE("quartic weight: second sum of C0 and c = delta") {
    const double delta = 0.05;
    PolyJet<Cd> quartic(1, 4);
    quartic.add(mono(1, {2}, {2}), delta);
    auto w = weight_from_normal_form<Cd>({1.0}, quartic);
    auto psi = phase_solve_recursive(w, 5);
    auto amp = transport_solve_recursive(w, psi, 2);
    auto parts = C0_value(w, psi.psi, amp.b0);
    CHECK(std::abs(parts.II.at(0, 0) + delta) < 1e-15);
    CHECK(std::abs(parts.III.at(0, 0)) < 1e-15);
    CHECK(std::abs(parts.IV.at(0, 0)) < 1e-15);
    CHECK(std::abs(parts.V.at(0, 0)) < 1e-15);
    auto c = c_constant(w, 1e-10, true);
    CHECK(std::abs(c.closed_form - delta) < 1e-15);
    CHECK(std::abs(c.hat_route - delta) < 1e-10);
    CHECK(std::abs(c_closed_form(w) - delta) < 1e-15);
  }

  TEST_CASE("exact c for the quartic weight") {
    PolyJet<QComplex> quartic(1, 4);
    quartic.add(mono(1, {2}, {2}), QComplex(mpq_class(1, 20)));
    auto w = weight_from_normal_form<QComplex>({mpq_class(1)}, quartic);
    CHECK(c_closed_form(w) == QComplex(mpq_class(1, 20)));
  }

  TEST_CASE("property: C0 routes, c routes and the imaginary phase dictionary") {
    for (const auto& p : testing::randomized_population(18, 555)) {
      CAPTURE(p.n);
      CAPTURE(p.q);
      CAPTURE(p.seed);
      auto w = testing::random_weight(p);
      auto psi = phase_solve_recursive(w, 5);
      auto amp = transport_solve_recursive(w, psi, 2);
      const auto generic = C0_generic(w, psi.psi, amp.b0);
      const auto value = C0_value(w, psi.psi, amp.b0);
      const double scale = std::max(1.0, max_abs(generic));
      CHECK(testing::max_diff(generic, value.total()) <= 1e-9 * scale);
      const Cd hat = hat_component(generic);
      CHECK(std::abs(hat.imag()) <= 1e-12 * scale);
      const auto hat_parts = C0_hat_closed_form(w);
      CHECK(std::abs(hat_parts.total() * hat_component(compose(amp.b0.constant_term(), amp.b0.constant_term())) - hat) <=
            1e-9 * scale);
      auto c = c_constant(w);
      CHECK(c.discrepancy <= 1e-9);
      CHECK(std::abs(c.closed_form.imag()) <= 1e-12);

      PolyJet<Cd> im(p.n, restrict_w_zero(psi.psi) + restrict_z_zero_as_z(psi.psi));
      im *= 1.0 / (2.0 * I);
      for (int s = 0; s < p.n; ++s)
        for (int j = 0; j < p.n; ++j)
          for (int t = 0; t < p.n; ++t) {
            std::vector<int> zb(p.n, 0), z(p.n, 0);
            ++zb[s];
            ++z[j];
            ++z[t];
            const double fact = j == t ? 2.0 : 1.0;
            CHECK(std::abs(imag_psi_third_closed_form(w, s, j, t) - fact * im.coeff(mono(p.n, zb, z))) < 1e-12);
            // no purely holomorphic third derivatives
            std::vector<int> z3(p.n, 0);
            ++z3[s];
            ++z3[j];
            ++z3[t];
            CHECK(std::abs(im.coeff(mono(p.n, {}, z3))) < 1e-12);
          }
    }
  }
}
