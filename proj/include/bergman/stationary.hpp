// Stationary phase at a nondegenerate critical point and the constant c of
// b1(0,0) obtained from the idempotence of the Bergman projection.
//
// Real coordinates are x_{2j} = Re z_j, x_{2j+1} = Im z_j (zero-based), and
// the measure dm is 2^n times Lebesgue measure in x.
#pragma once

#include <vector>

#include "bergman/forms.hpp"
#include "bergman/phase.hpp"
#include "bergman/transport.hpp"
#include "bergman/weight.hpp"

namespace bergman {

// f(x) = (1/2) <f''(0) x, x> + g(x) with f(0) = 0 and df(0) = 0.
template <class S>
struct RealQuadraticPhase {
  int n = 0;                      // complex dimension; the matrices are 2n x 2n
  std::vector<S> hessian;         // row-major
  std::vector<S> hessian_inverse;
  Poly<S> remainder;              // g: terms of degree >= 3, 2n variables
};

// Rewrites a jet in the z-blocks as a polynomial in the 2n real coordinates.
// Throws StructuralError if the jet involves w or wbar.
template <class S>
Poly<S> to_real_coordinates(const PolyJet<S>& a);

// Splits f into its Hessian and remainder.  Throws ValidationError when f has
// a constant or linear part and NumericalError when f''(0) is singular.
template <class S>
RealQuadraticPhase<S> make_real_phase(const PolyJet<S>& f);

// L_j u at the critical point for j <= 2:
//   sum over nu - mu = j, 2 nu >= 3 mu of i^{-j} 2^{-nu} <f''^{-1} D, D>^nu (g^mu u)(0) / (nu! mu!)
// with D = -i d/dx.  u must be known through degree 2 nu for every term used;
// `u_degree` states how far it is known.
template <class S>
S hormander_Lj(const RealQuadraticPhase<S>& phase, const Poly<S>& u, int j, int u_degree);
template <class S>
FormOp<S> hormander_Lj(const RealQuadraticPhase<S>& phase, const FormOpJet<S>& u, int j);

// 2^n det(k f''/(2 pi i))^{-1/2} sum_{j=0}^{order} k^{-j} L_j u, the branch of the
// square root being the one continuous from the positive definite case.
Cd stationary_phase_sum(const RealQuadraticPhase<Cd>& phase, const Poly<Cd>& u, int u_degree, double k, int order);

// The two factors of the idempotence integrand, as z-jets of degree <= 2:
// b0(0, z) and b0(z, 0), and the phase f = psi(0, z) + psi(z, 0) (= 2i Im psi(z,0)).
template <class S>
struct IdempotenceData {
  PolyJet<S> phase;
  FormOpJet<S> left;   // b0(0, z)
  FormOpJet<S> right;  // b0(z, 0)
};
template <class S>
IdempotenceData<S> idempotence_data(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b0);

// Everything below is in the reduced normalisation: C0 here is pi^{2n} times
// the operator C0 of the expansion, so that b0(0,0)^2 has hat |l_1...l_n|^2.

// L_1 of b0(0,z) b0(z,0) at 0 for the phase psi(0,z) + psi(z,0).
template <class S>
FormOp<S> C0_generic(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b0);

template <class S>
struct C0Parts {
  FormOp<S> I, II, III, IV, V;
  FormOp<S> total() const { return I + II + III + IV + V; }
};

// The five-sum expression of L_1(b0(0,z) b0(z,0))(0), every derivative read off
// the jets (Im psi(z, 0) from psi).
template <class S>
C0Parts<S> C0_value(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b0);

// The hat components of the five sums, as multiples of the hat of b0(0,0)^2,
// from the closed forms in the weight derivatives.
template <class S>
struct C0HatParts {
  S I{}, II{}, III{}, IV{}, V{};
  S total() const { return I + II + III + IV + V; }
};
template <class S>
C0HatParts<S> C0_hat_closed_form(const WeightJet<S>& w);

// d^3 Im psi(z,0) / dzbar_s dz_j dz_t (0) predicted from the weight alone.
template <class S>
S imag_psi_third_closed_form(const WeightJet<S>& w, int s, int j, int t);

// c from the closed form in the weight derivatives.
template <class S>
S c_closed_form(const WeightJet<S>& w);

// c from the hat component of C0: -c b0(0,0) = |l|^{-1} pi^n hat C0.
template <class S>
S c_from_C0(const WeightJet<S>& w, const FormOp<S>& C0_reduced);

template <class S>
struct CConstant {
  S closed_form{};
  S hat_route{};
  double discrepancy = 0.0;  // relative
};

// Both routes; the hat route runs the full recursive phase and transport
// solvers.  Throws NumericalError("c cross-check failure ...") when the two
// disagree beyond `tol` (relative) and `strict` is set.
template <class S>
CConstant<S> c_constant(const WeightJet<S>& w, double tol = 1e-9, bool strict = false);

}  // namespace bergman
