// Invariant tensors of the weight at the base point and the two assemblies of
// Tr b1(0, 0).
//
// The weight is taken in normal form, so U_j = d/dz_j at 0 and
// e_j = U_j / sqrt|l_j|.  Indices are zero-based; a (1,1)-form is stored by
// its coefficients of dzbar_s ^ dz_u.
#pragma once

#include <vector>

#include "bergman/stationary.hpp"
#include "bergman/weight.hpp"

namespace bergman {

template <class S>
struct GeomTensors {
  using Real = RealOf<S>;

  int n = 0;
  int q = 0;
  std::vector<Real> lambda;
  std::vector<Real> abs_lambda;

  // First-order jet of M^{-1}: entry (j, k) is
  //   minv0[j,k] + sum_s minv_dz[j,k,s] z_s + minv_dzbar[j,k,s] zbar_s.
  std::vector<S> minv0;       // n*n
  std::vector<S> minv_dz;     // n^3
  std::vector<S> minv_dzbar;  // n^3

  // theta = h^{-1} dh at 0: coefficient of dz_s in theta_{j,k}.
  std::vector<S> theta;  // n^3

  // (1,1)-form coefficient tables, index ((j*n + k)*n + s)*n + u.
  std::vector<S> theta_curv;  // curvature of theta
  std::vector<S> dminv_q;     // (dbar M^{-1}) Q
  std::vector<S> r_entries;   // theta_curv - dminv_q

  std::vector<Real> q_coeff;  // q_{j,k,s}
  std::vector<S> q_entries;   // coefficient of dz_s in Q_{j,k}

  // (U_j | U_k)_{|phi|} = delta_{jk} metric_vectors[j]; dz_j likewise with metric_forms.
  std::vector<Real> metric_vectors;
  std::vector<Real> metric_forms;

  int idx2(int j, int k) const { return j * n + k; }
  int idx3(int j, int k, int s) const { return (j * n + k) * n + s; }
  int idx4(int j, int k, int s, int u) const { return ((j * n + k) * n + s) * n + u; }

  // 1 when j and k lie in different eigenvalue blocks.
  int block_delta(int j, int k) const { return (j < q) != (k < q) ? 1 : 0; }
};

template <class S>
GeomTensors<S> geometry_tensors(const WeightJet<S>& w);

// Scalar pairings of the tensors against ebar_j ^ e_k, scaled by the pairing
// normalisation kappa of <dzbar_s ^ dz_u, dbar_j ^ d_k> = kappa delta_{sj} delta_{uk}.
template <class S>
struct PairingTables {
  std::vector<S> curvature;    // <(Theta e_j | e_k)_{|phi|}, ebar_j ^ e_k>, index j*n + k
  std::vector<S> dminv_q;      // <(dbar M^{-1} Q e_j | e_k)_{|phi|}, ebar_j ^ e_k>
  std::vector<S> r;            // curvature - dminv_q
  std::vector<S> q_cross;      // Re((Q e_j | e_j) | (dM e_k | e_k))_{|phi|}
  S q_diag_norm2{};            // |sum_j (Q e_j | e_j)|^2_{|phi|}
};

template <class S>
PairingTables<S> contraction_values(const GeomTensors<S>& g, const RealOf<S>& kappa);

// The printed invariant formula carries 2^n |l_1...l_n| pi^{-n} in front of
// its bracket.  Read with the unit pairing above it differs from the
// coordinate assembly by a factor of 2 per complex dimension, so the bracket
// is multiplied by kUnitNormalization^n.  The per-dimension constant is
// fixed once on the n = 1 quartic weight (see calibrate_unit_normalization)
// and frozen here.
inline constexpr double kUnitNormalization = 0.5;

// Recomputes the per-dimension constant from phi = |z|^2 + delta |z|^4.
double calibrate_unit_normalization(double delta = 0.05);

// Parts of the invariant expression; `bracket` is their sum and `reduced`
// equals pi^n Tr b1(0, 0) after the frozen normalisation.
template <class S>
struct InvariantTrace {
  S cubic{};      // sum over all j, k, s of a_{j,k,s} |<(dM U_j | U_k), U_s>|^2
  S curvature{};  // (1/4) weighted sum of the R pairings
  S cross{};      // - weighted sum of the Q cross terms
  S q_norm{};     // (1/2) |sum_j (Q e_j | e_j)|^2
  S bracket{};
  S reduced{};
};

// a_{j,k,s}
template <class S>
RealOf<S> cubic_weight(const GeomTensors<S>& g, int j, int k, int s);

template <class S>
InvariantTrace<S> trace_b1_invariant_parts(const WeightJet<S>& w);

// pi^n Tr b1(0,0) from the invariant formula.  The unnormalised variant
// keeps the bare 2^n prefactor and is what the calibration compares.
template <class S>
S trace_b1_invariant_reduced(const WeightJet<S>& w);
template <class S>
S trace_b1_invariant_unnormalized(const WeightJet<S>& w);
double trace_b1_invariant(const WeightJet<Cd>& w);

// pi^n Tr b1(0,0) = Tr(explicit sums of b1) + c Tr(b0 leading), c from the
// closed form.
template <class S>
S trace_b1_coordinate_reduced(const WeightJet<S>& w);
double trace_b1_coordinate(const WeightJet<Cd>& w);

// pi^n Tr b0(0,0) = |l_1 ... l_n|.
template <class S>
S trace_b0_reduced(const WeightJet<S>& w);

}  // namespace bergman
