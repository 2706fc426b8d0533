#include "bergman/geometry.hpp"

#include <cmath>
#include <numbers>

namespace bergman {

namespace {

template <class S>
using Real = RealOf<S>;

template <class S>
S from_real(const Real<S>& r) {
  if constexpr (std::is_same_v<S, Cd>)
    return S(r, 0.0);
  else
    return S(r);
}

// kUnitNormalization^n in the real field of S.
template <class S>
Real<S> power_of_half(int n) {
  static_assert(kUnitNormalization == 0.5);
  return Real<S>(1) / Real<S>(1 << n);
}

template <class S>
Real<S> abs2(const S& x) {
  return Field<S>::re(x * Field<S>::conj(x));
}

}  // namespace

template <class S>
GeomTensors<S> geometry_tensors(const WeightJet<S>& w) {
  GeomTensors<S> g;
  const int n = w.n;
  g.n = n;
  g.q = w.q;
  g.lambda = w.lambda;
  for (int j = 0; j < n; ++j) g.abs_lambda.push_back(w.abs_lambda(j));
  g.metric_vectors = g.abs_lambda;
  for (const auto& a : g.abs_lambda) g.metric_forms.push_back(Real<S>(1) / a);

  const int n2 = n * n, n3 = n2 * n;
  g.minv0.assign(n2, S(0));
  g.minv_dz.assign(n3, S(0));
  g.minv_dzbar.assign(n3, S(0));
  g.theta.assign(n3, S(0));
  g.q_coeff.assign(n3, Real<S>(0));
  g.q_entries.assign(n3, S(0));
  g.theta_curv.assign(n3 * n, S(0));
  g.dminv_q.assign(n3 * n, S(0));
  g.r_entries.assign(n3 * n, S(0));

  std::vector<S> lam;
  for (const auto& l : w.lambda) lam.push_back(from_real<S>(l));

  for (int j = 0; j < n; ++j) {
    g.minv0[g.idx2(j, j)] = S(1) / lam[j];
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < n; ++s) {
        const S inv = S(1) / (lam[j] * lam[k]);
        g.minv_dz[g.idx3(j, k, s)] = -inv * w.d({j}, {k, s});
        g.minv_dzbar[g.idx3(j, k, s)] = -inv * w.d({j, s}, {k});
        g.theta[g.idx3(j, k, s)] = w.d({j}, {k, s}) / lam[j];
      }
  }

  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < n; ++s)
        for (int u = 0; u < n; ++u) {
          S v = w.d({j, s}, {k, u}) / lam[j];
          for (int t = 0; t < n; ++t) v -= w.d({j, s}, {t}) * w.d({t}, {k, u}) / (lam[t] * lam[j]);
          g.theta_curv[g.idx4(j, k, s, u)] = v;
        }

  const auto& L = g.abs_lambda;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < n; ++s) {
        const int dk = g.block_delta(j, k), ds = g.block_delta(j, s);
        const Real<S> num = Real<S>(dk) * L[k] + Real<S>(ds) * L[s];
        Real<S> coeff = num / (L[j] + num);
        if (dk && ds) {
          const Real<S> total = L[j] + L[k] + L[s];
          const Real<S> pair = Real<S>(1) / (L[j] + L[k]) + Real<S>(1) / (L[j] + L[s]);
          coeff -= L[k] * L[k] * L[s] * L[s] / (total * total) * pair * pair;
        }
        g.q_coeff[g.idx3(j, k, s)] = coeff;
        g.q_entries[g.idx3(j, k, s)] = from_real<S>(coeff) * w.d({j}, {k, s});
      }

  // (dbar M^{-1} Q)_{k,j} = sum_t (dbar M^{-1})_{k,t} ^ Q_{t,j}
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < n; ++s)
        for (int u = 0; u < n; ++u) {
          S v(0);
          for (int t = 0; t < n; ++t) v += g.minv_dzbar[g.idx3(k, t, s)] * g.q_entries[g.idx3(t, j, u)];
          g.dminv_q[g.idx4(k, j, s, u)] = v;
        }
  for (std::size_t i = 0; i < g.r_entries.size(); ++i) g.r_entries[i] = g.theta_curv[i] - g.dminv_q[i];
  return g;
}

template <class S>
PairingTables<S> contraction_values(const GeomTensors<S>& g, const RealOf<S>& kappa) {
  const int n = g.n;
  PairingTables<S> out;
  out.curvature.assign(n * n, S(0));
  out.dminv_q.assign(n * n, S(0));
  out.r.assign(n * n, S(0));
  out.q_cross.assign(n * n, S(0));
  const auto& L = g.abs_lambda;

  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const S factor = from_real<S>(kappa * g.metric_vectors[k] / (L[j] * L[k]));
      const int at = g.idx4(k, j, j, k);
      out.curvature[g.idx2(j, k)] = factor * g.theta_curv[at];
      out.dminv_q[g.idx2(j, k)] = factor * g.dminv_q[at];
      out.r[g.idx2(j, k)] = factor * g.r_entries[at];
    }

  // (Q e_j | e_j) and (dM e_k | e_k) as (1,0)-forms, Euclidean in the vector slot.
  std::vector<S> q_diag(n * n, S(0)), dm_diag(n * n, S(0));
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < n; ++s) {
      q_diag[g.idx2(j, s)] = g.q_entries[g.idx3(j, j, s)] / from_real<S>(L[j]);
      dm_diag[g.idx2(j, s)] = g.theta[g.idx3(j, j, s)] * from_real<S>(g.lambda[j] / L[j]);
    }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      S v(0);
      for (int s = 0; s < n; ++s)
        v += from_real<S>(g.metric_forms[s]) * q_diag[g.idx2(j, s)] * Field<S>::conj(dm_diag[g.idx2(k, s)]);
      out.q_cross[g.idx2(j, k)] = from_real<S>(Field<S>::re(v));
    }
  Real<S> norm2(0);
  for (int s = 0; s < n; ++s) {
    S v(0);
    for (int j = 0; j < n; ++j) v += q_diag[g.idx2(j, s)];
    norm2 += g.metric_forms[s] * abs2(v);
  }
  out.q_diag_norm2 = from_real<S>(norm2);
  return out;
}

template <class S>
RealOf<S> cubic_weight(const GeomTensors<S>& g, int j, int k, int s) {
  if (!g.block_delta(k, j) || !g.block_delta(k, s)) return RealOf<S>(0);
  const auto& L = g.abs_lambda;
  const RealOf<S> pair = L[j] + L[k];
  const RealOf<S> total = pair + L[s];
  return L[s] / (RealOf<S>(2) * pair * pair * total * total);
}

template <class S>
InvariantTrace<S> trace_b1_invariant_parts(const WeightJet<S>& w) {
  const GeomTensors<S> g = geometry_tensors(w);
  const PairingTables<S> p = contraction_values(g, RealOf<S>(1));
  const int n = g.n, q = g.q;
  const auto& L = g.abs_lambda;
  InvariantTrace<S> out;

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < n; ++s)
        out.cubic += from_real<S>(cubic_weight(g, j, k, s) * abs2(w.d({k}, {j, s})));

  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Real<S> weight = Real<S>(1) + Real<S>(g.block_delta(j, k)) * (L[j] - L[k]) / (L[j] + L[k]);
      out.curvature += from_real<S>(weight / Real<S>(4)) * p.r[g.idx2(j, k)];
      if (g.block_delta(j, k)) out.cross -= from_real<S>(L[j] / (L[j] + L[k])) * p.q_cross[g.idx2(j, k)];
    }
  out.q_norm = p.q_diag_norm2 / S(2);
  out.bracket = out.cubic + out.curvature + out.cross + out.q_norm;
  // 2^n kUnitNormalization^n = 1 exactly, for either field.
  const Real<S> normalization = Real<S>(1 << n) * power_of_half<S>(n);
  out.reduced = from_real<S>(normalization * w.abs_det()) * out.bracket;
  return out;
}

template <class S>
S trace_b1_invariant_reduced(const WeightJet<S>& w) {
  return trace_b1_invariant_parts(w).reduced;
}

template <class S>
S trace_b1_invariant_unnormalized(const WeightJet<S>& w) {
  const InvariantTrace<S> parts = trace_b1_invariant_parts(w);
  return from_real<S>(Real<S>(1 << w.n) * w.abs_det()) * parts.bracket;
}

double calibrate_unit_normalization(double delta) {
  PolyJet<Cd> quartic(1, 4);
  Mono m;
  m.set(block_var(1, Block::ZBar, 0), 2);
  m.set(block_var(1, Block::Z, 0), 2);
  quartic.add(m, Cd(delta));
  const WeightJet<Cd> w = weight_from_normal_form<Cd>({1.0}, quartic);
  return trace_b1_coordinate_reduced(w).real() / trace_b1_invariant_unnormalized(w).real();
}

double trace_b1_invariant(const WeightJet<Cd>& w) {
  return trace_b1_invariant_reduced(w).real() * std::pow(std::numbers::pi, -w.n);
}

template <class S>
S trace_b0_reduced(const WeightJet<S>& w) {
  return from_real<S>(w.abs_det());
}

template <class S>
S trace_b1_coordinate_reduced(const WeightJet<S>& w) {
  return form_trace(b1_explicit_closed_form(w)) + c_closed_form(w) * trace_b0_reduced(w);
}

double trace_b1_coordinate(const WeightJet<Cd>& w) {
  return trace_b1_coordinate_reduced(w).real() * std::pow(std::numbers::pi, -w.n);
}

#define BERGMAN_GEOMETRY_INSTANTIATE(S)                                                        \
  template GeomTensors<S> geometry_tensors<S>(const WeightJet<S>&);                            \
  template PairingTables<S> contraction_values<S>(const GeomTensors<S>&, const RealOf<S>&);    \
  template RealOf<S> cubic_weight<S>(const GeomTensors<S>&, int, int, int);                    \
  template InvariantTrace<S> trace_b1_invariant_parts<S>(const WeightJet<S>&);                 \
  template S trace_b1_invariant_reduced<S>(const WeightJet<S>&);                               \
  template S trace_b1_invariant_unnormalized<S>(const WeightJet<S>&);                          \
  template S trace_b0_reduced<S>(const WeightJet<S>&);                                         \
  template S trace_b1_coordinate_reduced<S>(const WeightJet<S>&);

BERGMAN_GEOMETRY_INSTANTIATE(Cd)
BERGMAN_GEOMETRY_INSTANTIATE(QComplex)

}  // namespace bergman
