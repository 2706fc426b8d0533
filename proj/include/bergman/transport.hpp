// Amplitude jets b_0(z, w) near (0, 0) and the partial value of b_1(0, 0).
//
// All amplitudes in this module use the reduced normalisation
// pi^n * b, so that every coefficient is an algebraic function of the weight
// jet and the exact rational mode never meets pi.  Multiply by pi^{-n} to
// recover the kernel coefficients (b0_leading does this for doubles).
#pragma once

#include <string>
#include <vector>

#include "bergman/forms.hpp"
#include "bergman/phase.hpp"
#include "bergman/weight.hpp"

namespace bergman {

class TransportError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

template <class S>
struct SignTables {
  using Real = RealOf<S>;

  int n = 0;
  int q = 0;
  std::vector<Real> abs_lambda;

  explicit SignTables(const WeightJet<S>& w);

  // 1 when j and k sit in different eigenvalue blocks (zero-based indices).
  int delta(int j, int k) const { return (j < q) != (k < q) ? 1 : 0; }
  int chi1(int s) const { return s < q ? 1 : 0; }
  int chi2(int s) const { return s < q ? 0 : 1; }
  unsigned I0() const { return first_block_mask(q); }
  // 2 sum_{j in J, j >= q} |l_j| + 2 sum_{j not in J, j < q} |l_j|
  Real F(unsigned J) const;
};

// |l_1 ... l_n| M_{I0,I0}; throws ValidationError unless q equals the number
// of negative eigenvalues.
template <class S>
FormOp<S> b0_leading_reduced(const WeightJet<S>& w, int q);
FormOp<Cd> b0_leading(const WeightJet<Cd>& w, int q);

// The model operator of the transport equations: the zeroth order part
// acting on the output form degree plus the Euler field
// sum_{j>=q} 2|l_j| zbar_j d/dzbar_j + sum_{j<q} 2|l_j| z_j d/dz_j.
template <class S>
FormOpJet<S> L_apply(const FormOpJet<S>& b, const SignTables<S>& st);

template <class S>
struct LSolveResult {
  FormOpJet<S> solution;
  FormOpJet<S> kernel_part;  // the components of the input lying in ker L
};

// Divides every basis coefficient by its L-eigenvalue.  Kernel components of
// the input are returned in kernel_part; when they are not negligible a
// TransportError listing them is thrown unless allow_kernel is set.
template <class S>
LSolveResult<S> L_solve(const FormOpJet<S>& a, const SignTables<S>& st, bool allow_kernel = false);

// The order-k coefficient of the conjugated Kodaira Laplacian applied to an
// amplitude b:
//   sum_{j,t} dP_t/dzbar_j dzbar_j^ dzbar_t^* b - sum_{j,t} dQ_j/dz_t dzbar_t^* dzbar_j^ b
//     + sum_j P_j db/dzbar_j - sum_j Q_j db/dz_j
// with P_j = -i dpsi/dz_j + dphi/dz_j and Q_j = i dpsi/dzbar_j + dphi/dzbar_j.
template <class S>
FormOpJet<S> transport_operator(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b, int cutoff);

// The same operator seen from the second point: A_S T A_S.
template <class S>
FormOpJet<S> transport_operator_w(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b, int cutoff);

// (-1)^q det(d^2 phi / dzbar_j dz_k)(z) as a z-jet, by elimination over jets.
template <class S>
PolyJet<S> signed_hessian_determinant(const WeightJet<S>& w, int cutoff);

template <class S>
struct AmplitudeSolution {
  FormOpJet<S> b0;       // full jet in (z, w) through `order`
  FormOp<S> laplace_b0;  // sum_j d^2 b0 / dz_j dzbar_j at (0, 0)
  FormOp<S> b1_known;    // b1(0,0) with its M_{I0,I0} entry left at zero
  S b1_trace_known;      // trace of b1_known
  double b1_consistency = 0.0;  // size of the equations b1 must satisfy trivially
};

// Order-by-order solution of both transport equations, with the joint
// kernel fixed by tr b0(z, z) = (-1)^q det M_phi(z).  Needs psi through
// order + 2.
template <class S>
AmplitudeSolution<S> transport_solve_recursive(const WeightJet<S>& w, const PhaseJet<S>& psi, int order = 2);

// Closed forms.  b01_closed_form returns the degree-one jet in (z, w); its
// (z, 0) part is the printed first-order formula and its (0, w) part is the
// adjoint swap of it.
template <class S>
FormOpJet<S> b01_closed_form(const WeightJet<S>& w);

// The (0, w) part predicted before the kernel is known: every term of b01(0, w)
// outside ker L.
template <class S>
FormOpJet<S> b01_w_part_closed_form(const WeightJet<S>& w);

// Family of |z_s|^2 coefficients of b0^2(z, 0) that the b1 computation uses.
// The rest of b0^2(z, 0) splits as r + h with d^2 r / dzbar_j dz_j = 0 and
// tr h = 0; those pieces are not produced, and `unknown_remainder` says so.
template <class S>
struct QuadraticFamily {
  FormOpJet<S> family;
  bool unknown_remainder = true;
};
template <class S>
QuadraticFamily<S> b02_diag_closed_form(const WeightJet<S>& w, const PolyJet<S>& psi);

// The two explicit sums of b1(0,0); the remaining part is c b0^0 + R with
// tr R = 0 and c supplied by the stationary phase module.
template <class S>
FormOp<S> b1_explicit_closed_form(const WeightJet<S>& w);

struct TransportResiduals {
  double order1 = 0.0;  // degree-1 part of both transport equations
  double order2 = 0.0;  // degree-2 part
  double self_adjoint = 0.0;
  double trace_derivative = 0.0;
};

// Residuals of a candidate amplitude jet b (degree <= 2).
template <class S>
TransportResiduals transport_residuals(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b);

}  // namespace bergman
