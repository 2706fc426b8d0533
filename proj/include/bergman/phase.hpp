// Taylor expansion of the phase psi(z, w) at (0, 0).
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bergman/jets.hpp"
#include "bergman/weight.hpp"

namespace bergman {

template <class S>
struct PhaseJet {
  PolyJet<S> psi;
  int complete_order = 2;     // every coefficient of total degree <= this is known
  std::set<Mono> determined;  // further known coefficients above complete_order

  bool is_determined(const Mono& m) const {
    return m.degree() <= complete_order || determined.count(m) > 0;
  }
};

// A coefficient whose value from a printed closed form disagrees with the
// value forced by antisymmetry or by the diagonal identity.
struct PhaseConflict {
  std::string monomial;
  std::string source;
  Cd printed;
  Cd forced;
};

template <class S>
PhaseJet<S> phase_order2(const WeightJet<S>& w, int max_degree = 5);

// Solves the eikonal identities order by order up to `order` (at most 6).
// Degree-`order` coefficients are exact only when the weight has no terms of
// degree above 4, which holds for every normalised WeightJet.
template <class S>
PhaseJet<S> phase_solve_recursive(const WeightJet<S>& w, int order = 5);

template <class S>
PhaseJet<S> phase_closed_form(const WeightJet<S>& w, std::vector<PhaseConflict>* conflicts = nullptr);

// Max |coefficient| of total order <= check_order over both eikonal identities.
template <class S>
double phase_residual(const WeightJet<S>& w, const PhaseJet<S>& psi, int check_order = 4);

// The two eikonal expressions as jets, truncated at `cutoff`:
//   z-side: sum_j (i dpsi/dzbar_j + dphi/dzbar_j(z)) (-i dpsi/dz_j + dphi/dz_j(z))
//   w-side: sum_j (i dpsi/dw_j + dphi/dw_j(w)) (-i dpsi/dwbar_j + dphi/dwbar_j(w))
template <class S>
PolyJet<S> eikonal_z(const WeightJet<S>& w, const PolyJet<S>& psi, int cutoff);
template <class S>
PolyJet<S> eikonal_w(const WeightJet<S>& w, const PolyJet<S>& psi, int cutoff);

// The model operator T = sum_{j<=q} 2i|l_j| z_j d/dz_j + sum_{j>q} 2i|l_j| zbar_j d/dzbar_j
// and its inverse on monomials whose (alpha'', beta') part is nonzero.
// The inverse throws StructuralError if h has a component in the kernel.
template <class S>
PolyJet<S> model_T(const std::vector<RealOf<S>>& lambda, int q, const PolyJet<S>& g);
template <class S>
PolyJet<S> model_T_inverse(const std::vector<RealOf<S>>& lambda, int q, const PolyJet<S>& h);

// The closed-form fourth derivatives d^4 psi / dzbar_j dz_j dzbar_k dz_k (0,0),
// keyed by zero-based (j, k) with j <= k.
template <class S>
std::map<std::pair<int, int>, S> diagonal_quartic_closed_form(const WeightJet<S>& w);

// d^4 psi / dzbar_j dz_j dzbar_k dz_k (0,0) read off a phase jet.
template <class S>
S diagonal_quartic_from_jet(const PolyJet<S>& psi, int j, int k);

// Linear changes of variables between the original blocks and coordinates
// adapted to the signature (u = z' - w', p = wbar' - zbar', v = zbar'' - wbar'',
// r = w'' - z''), each stored in the slot of the variable it replaces.
template <class S>
PolyJet<S> to_adapted(const PolyJet<S>& a, int q);
template <class S>
PolyJet<S> from_adapted(const PolyJet<S>& a, int q);

// Weights of an adapted monomial under the two linearised eikonal operators.
template <class R>
R adapted_weight_z(const std::vector<R>& abs_lambda, int q, const Mono& m);
template <class R>
R adapted_weight_w(const std::vector<R>& abs_lambda, int q, const Mono& m);

}  // namespace bergman
