#include "bergman/transport.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

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

template <class S>
bool negligible(const S& value, double scale) {
  if constexpr (Field<S>::exact)
    return Field<S>::is_zero(value);
  else
    return Field<S>::magnitude(value) <= 1e-9 * std::max(1.0, scale);
}

template <class S>
PolyJet<S> single_var(int n, Block blk, int j, int maxdeg, const S& c = S(1)) {
  return PolyJet<S>(n, variable_poly<S>(4 * n, maxdeg, block_var(n, blk, j), c));
}

template <class S>
FormOp<S> contract_wedge(int n, int q, int contract_index, int wedge_index) {
  return compose(generator<S>(GenKind::Contract, contract_index, n, q), generator<S>(GenKind::Wedge, wedge_index, n, q));
}

template <class S>
PolyJet<S> phi_at(const WeightJet<S>& w, int cutoff) {
  return PolyJet<S>(w.n, truncate<S>(w.phi, cutoff));
}

// First and second derivatives of the phase function data entering the
// conjugated Laplacian, cached for repeated application.
template <class S>
struct TransportData {
  int n = 0, q = 0, cutoff = 0;
  std::vector<PolyJet<S>> P, Q;        // P_t, Q_j
  std::vector<std::vector<PolyJet<S>>> dP;  // dP[j][t] = dP_t / dzbar_j
  std::vector<std::vector<PolyJet<S>>> dQ;  // dQ[t][j] = dQ_j / dz_t
  std::vector<std::vector<FormOp<S>>> G;    // wedge_j contract_t
  std::vector<std::vector<FormOp<S>>> H;    // contract_t wedge_j

  TransportData(const WeightJet<S>& w, const PolyJet<S>& psi, int cut) : n(w.n), q(w.q), cutoff(cut) {
    const int deg = cut + 1;
    const S i = Field<S>::unit();
    const PolyJet<S> ps(n, truncate<S>(psi, deg + 1));
    const PolyJet<S> ph(n, truncate<S>(w.phi, deg + 1));
    P.resize(n);
    Q.resize(n);
    for (int j = 0; j < n; ++j) {
      PolyJet<S> p = jet_diff(ps, Block::Z, j);
      p *= -i;
      p += jet_diff(ph, Block::Z, j);
      P[j] = p;
      PolyJet<S> qq = jet_diff(ps, Block::ZBar, j);
      qq *= i;
      qq += jet_diff(ph, Block::ZBar, j);
      Q[j] = qq;
    }
    dP.assign(n, std::vector<PolyJet<S>>(n));
    dQ.assign(n, std::vector<PolyJet<S>>(n));
    G.assign(n, std::vector<FormOp<S>>(n));
    H.assign(n, std::vector<FormOp<S>>(n));
    for (int j = 0; j < n; ++j)
      for (int t = 0; t < n; ++t) {
        dP[j][t] = jet_diff(P[t], Block::ZBar, j);
        dQ[t][j] = jet_diff(Q[j], Block::Z, t);
        if (q > 0)
          G[j][t] = compose(generator<S>(GenKind::Wedge, j, n, q - 1), generator<S>(GenKind::Contract, t, n, q - 1));
        else
          G[j][t] = FormOp<S>(n, q, q);
        if (q < n)
          H[t][j] = compose(generator<S>(GenKind::Contract, t, n, q), generator<S>(GenKind::Wedge, j, n, q));
        else
          H[t][j] = FormOp<S>(n, q, q);
      }
  }

  FormOpJet<S> apply(const FormOpJet<S>& b) const {
    FormOpJet<S> out(n, b.q_in(), q, cutoff);
    for (int j = 0; j < n; ++j)
      for (int t = 0; t < n; ++t) {
        if (!dP[j][t].empty()) out += scale(dP[j][t], compose(G[j][t], b), cutoff);
        if (!dQ[t][j].empty()) out -= scale(dQ[t][j], compose(H[t][j], b), cutoff);
      }
    for (int j = 0; j < n; ++j) {
      out += scale(P[j], jet_diff(b, Block::ZBar, j), cutoff);
      out -= scale(Q[j], jet_diff(b, Block::Z, j), cutoff);
    }
    return out;
  }
};

template <class S>
Real<S> euler_weight(const SignTables<S>& st, const Mono& m) {
  Real<S> e = 0;
  for (int j = 0; j < st.n; ++j) {
    if (j >= st.q)
      e += Real<S>(2 * m.exp(block_var(st.n, Block::ZBar, j))) * st.abs_lambda[j];
    else
      e += Real<S>(2 * m.exp(block_var(st.n, Block::Z, j))) * st.abs_lambda[j];
  }
  return e;
}

template <class S>
bool real_is_zero(const Real<S>& r) {
  return r == Real<S>(0);
}

// 1 / c for the unit-constant jet c, via the truncated geometric series.
template <class S>
PolyJet<S> jet_inverse(const PolyJet<S>& a, int cutoff) {
  const S c0 = a.coeff(Mono{});
  if (Field<S>::is_zero(c0)) throw TransportError("jet_inverse: vanishing constant term");
  const S inv0 = S(1) / c0;
  PolyJet<S> x(a.n(), truncate<S>(a, cutoff));
  x.add(Mono{}, -c0);
  x *= -inv0;
  PolyJet<S> sum(a.n(), constant_poly<S>(4 * a.n(), cutoff, S(1)));
  PolyJet<S> power = sum;
  for (int k = 1; k <= cutoff; ++k) {
    power = PolyJet<S>(a.n(), multiply<S>(power, x, cutoff));
    if (power.empty()) break;
    sum += power;
  }
  sum *= inv0;
  return sum;
}

// The kernel monomial of L and of its w-side counterpart sharing the
// diagonal restriction of a z-monomial.
Mono kernel_lift(int n, int q, const Mono& diag) {
  Mono out;
  for (int j = 0; j < n; ++j) {
    const int zb = diag.exp(block_var(n, Block::ZBar, j));
    const int z = diag.exp(block_var(n, Block::Z, j));
    if (j < q) {
      out.set(block_var(n, Block::ZBar, j), zb);
      out.set(block_var(n, Block::W, j), z);
    } else {
      out.set(block_var(n, Block::Z, j), z);
      out.set(block_var(n, Block::WBar, j), zb);
    }
  }
  return out;
}

}  // namespace

template <class S>
SignTables<S>::SignTables(const WeightJet<S>& w) : n(w.n), q(w.q), abs_lambda(w.n) {
  for (int j = 0; j < n; ++j) abs_lambda[j] = w.abs_lambda(j);
}

template <class S>
typename SignTables<S>::Real SignTables<S>::F(unsigned J) const {
  Real f = 0;
  for (int j = 0; j < n; ++j) {
    const bool in = (J >> j) & 1u;
    if (j >= q && in) f += Real(2) * abs_lambda[j];
    if (j < q && !in) f += Real(2) * abs_lambda[j];
  }
  return f;
}

template <class S>
FormOp<S> b0_leading_reduced(const WeightJet<S>& w, int q) {
  if (q != w.q) {
    std::ostringstream os;
    os << "form degree " << q << " does not match the number of negative eigenvalues " << w.q;
    throw ValidationError(os.str());
  }
  FormOp<S> out(w.n, q, q);
  out.set_basis_coeff(first_block_mask(q), first_block_mask(q), from_real<S>(w.abs_det()));
  return out;
}

FormOp<Cd> b0_leading(const WeightJet<Cd>& w, int q) {
  FormOp<Cd> out = b0_leading_reduced(w, q);
  out *= Cd(std::pow(std::numbers::pi, -w.n), 0.0);
  return out;
}

template <class S>
FormOpJet<S> L_apply(const FormOpJet<S>& b, const SignTables<S>& st) {
  const FormBasis& out_basis = form_basis(st.n, b.q_out());
  FormOpJet<S> out(b.n(), b.q_in(), b.q_out(), b.max_degree());
  for (int r = 0; r < b.rows(); ++r) {
    const Real<S> fk = st.F(out_basis.mask(r));
    for (int c = 0; c < b.cols(); ++c)
      b.at(r, c).for_each([&](const Mono& m, const S& v) {
        out.at(r, c).add(m, v * from_real<S>(fk + euler_weight(st, m)));
      });
  }
  return out;
}

template <class S>
LSolveResult<S> L_solve(const FormOpJet<S>& a, const SignTables<S>& st, bool allow_kernel) {
  const FormBasis& out_basis = form_basis(st.n, a.q_out());
  LSolveResult<S> res{FormOpJet<S>(a.n(), a.q_in(), a.q_out(), a.max_degree()),
                      FormOpJet<S>(a.n(), a.q_in(), a.q_out(), a.max_degree())};
  const double scale = max_abs(a);
  std::ostringstream bad;
  bool any = false;
  for (int r = 0; r < a.rows(); ++r) {
    const Real<S> fk = st.F(out_basis.mask(r));
    for (int c = 0; c < a.cols(); ++c)
      a.at(r, c).for_each([&](const Mono& m, const S& v) {
        const Real<S> eig = fk + euler_weight(st, m);
        if (real_is_zero<S>(eig)) {
          res.kernel_part.at(r, c).add(m, v);
          if (!negligible(v, scale)) {
            any = true;
            bad << " (" << r << "," << c << "," << monomial_name(a.n(), m) << ")";
          }
        } else {
          res.solution.at(r, c).add(m, v / from_real<S>(eig));
        }
      });
  }
  if (any && !allow_kernel) throw TransportError("L_solve: right-hand side meets the kernel at" + bad.str());
  return res;
}

template <class S>
FormOpJet<S> transport_operator(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b, int cutoff) {
  return TransportData<S>(w, psi, cutoff).apply(b);
}

template <class S>
FormOpJet<S> transport_operator_w(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b, int cutoff) {
  return adjoint_swap(transport_operator(w, psi, adjoint_swap(b), cutoff));
}

template <class S>
PolyJet<S> signed_hessian_determinant(const WeightJet<S>& w, int cutoff) {
  const int n = w.n;
  const PolyJet<S> ph = phi_at(w, cutoff + 2);
  std::vector<std::vector<PolyJet<S>>> m(n, std::vector<PolyJet<S>>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      m[j][k] = PolyJet<S>(n, truncate<S>(jet_diff(jet_diff(ph, Block::ZBar, j), Block::Z, k), cutoff));
  PolyJet<S> det(n, constant_poly<S>(4 * n, cutoff, S(1)));
  for (int k = 0; k < n; ++k) {
    const PolyJet<S> inv = jet_inverse(m[k][k], cutoff);
    det = PolyJet<S>(n, multiply<S>(det, m[k][k], cutoff));
    for (int r = k + 1; r < n; ++r) {
      if (m[r][k].empty()) continue;
      const PolyJet<S> factor(n, multiply<S>(m[r][k], inv, cutoff));
      for (int c = k + 1; c < n; ++c) m[r][c] -= PolyJet<S>(n, multiply<S>(factor, m[k][c], cutoff));
    }
  }
  if (w.q % 2) det *= S(-1);
  return det;
}

template <class S>
AmplitudeSolution<S> transport_solve_recursive(const WeightJet<S>& w, const PhaseJet<S>& psi, int order) {
  const int n = w.n, q = w.q;
  if (psi.complete_order < order + 2)
    throw ValidationError("transport_solve_recursive: phase jet is not complete through order + 2");
  const SignTables<S> st(w);
  const unsigned I0 = st.I0();
  const FormBasis& basis = form_basis(n, q);
  const TransportData<S> data(w, psi.psi, order);
  const PolyJet<S> det = signed_hessian_determinant(w, order);

  FormOpJet<S> b(n, q, q, order);
  b.basis_entry(I0, I0).add(Mono{}, from_real<S>(w.abs_det()));

  for (int m = 1; m <= order; ++m) {
    FormOpJet<S> rz = homogeneous_part(data.apply(b), m);
    rz *= S(-1);
    const FormOpJet<S> rw = adjoint_swap(rz);
    const double scale = std::max(max_abs(rz), 1.0);
    FormOpJet<S> step(n, q, q, order);
    for (int r = 0; r < basis.dim(); ++r) {
      const Real<S> fk = st.F(basis.mask(r));
      for (int c = 0; c < basis.dim(); ++c) {
        const Real<S> fj = st.F(basis.mask(c));
        const PolyJet<S> az = to_adapted(rz.at(r, c), q);
        const PolyJet<S> aw = to_adapted(rw.at(r, c), q);
        PolyJet<S> sol(n, order);
        auto visit = [&](const Mono& mono) {
          const S vz = az.coeff(mono), vw = aw.coeff(mono);
          const Real<S> ez = fk + adapted_weight_z(st.abs_lambda, q, mono);
          const Real<S> ew = fj + adapted_weight_w(st.abs_lambda, q, mono);
          if (!real_is_zero<S>(ez)) {
            const S val = vz / from_real<S>(ez);
            if (!real_is_zero<S>(ew) && !negligible(S(val - vw / from_real<S>(ew)), scale))
              throw TransportError("transport_solve_recursive: the two transport equations disagree at " +
                                   monomial_name(n, mono));
            sol.add(mono, val);
          } else if (!real_is_zero<S>(ew)) {
            if (!negligible(vz, scale))
              throw TransportError("transport_solve_recursive: kernel component in z-equation at " +
                                   monomial_name(n, mono));
            sol.add(mono, vw / from_real<S>(ew));
          } else if (!negligible(vz, scale) || !negligible(vw, scale)) {
            throw TransportError("transport_solve_recursive: joint kernel met at " + monomial_name(n, mono));
          }
        };
        az.for_each([&](const Mono& mono, const S&) { visit(mono); });
        aw.for_each([&](const Mono& mono, const S&) {
          if (Field<S>::is_zero(az.coeff(mono))) visit(mono);
        });
        step.at(r, c) = from_adapted(sol, q);
      }
    }
    b += step;
    PolyJet<S> diff(n, homogeneous_part<S>(det, m));
    diff -= PolyJet<S>(n, homogeneous_part<S>(restrict_diagonal(form_trace(b)), m));
    diff.for_each([&](const Mono& mono, const S& v) { b.basis_entry(I0, I0).add(kernel_lift(n, q, mono), v); });
  }

  AmplitudeSolution<S> out;
  out.b0 = b;
  FormOp<S> lap(n, q, q);
  for (int j = 0; j < n; ++j) lap += jet_diff(jet_diff(b, Block::Z, j), Block::ZBar, j).constant_term();
  out.laplace_b0 = lap;
  const FormOp<S> lap_adj = form_adjoint(lap);
  const double scale = std::max(max_abs(lap), 1.0);
  FormOp<S> b1(n, q, q);
  double worst = 0.0;
  auto note = [&](const S& v) { worst = std::max(worst, Field<S>::magnitude(v) / scale); };
  for (int r = 0; r < basis.dim(); ++r) {
    const Real<S> fk = st.F(basis.mask(r));
    for (int c = 0; c < basis.dim(); ++c) {
      const Real<S> fj = st.F(basis.mask(c));
      const S sz = lap.at(r, c), sw = lap_adj.at(r, c);
      if (!real_is_zero<S>(fk)) {
        const S val = sz / from_real<S>(fk);
        if (!real_is_zero<S>(fj)) note(S(val - sw / from_real<S>(fj)));
        b1.at(r, c) = val;
      } else if (!real_is_zero<S>(fj)) {
        note(sz);
        b1.at(r, c) = sw / from_real<S>(fj);
      } else {
        note(sz);
        note(sw);
      }
    }
  }
  out.b1_known = b1;
  out.b1_trace_known = form_trace(b1);
  out.b1_consistency = worst;
  return out;
}

template <class S>
FormOpJet<S> b01_closed_form(const WeightJet<S>& w) {
  const int n = w.n, q = w.q, deg = 2;
  const SignTables<S> st(w);
  const FormOp<S> b00 = b0_leading_reduced(w, q);
  const auto L = [&](int j) { return from_real<S>(st.abs_lambda[j]); };
  FormOpJet<S> bz(n, q, q, deg);
  auto add_term = [&](const S& coeff, Block blk, int s, const FormOp<S>& op) {
    if (Field<S>::is_zero(coeff)) return;
    bz += scale(single_var<S>(n, blk, s, deg, coeff), FormOpJet<S>::constant(op, deg), deg);
  };
  for (int j = q; j < n; ++j)
    for (int k = 0; k < q; ++k) {
      const FormOp<S> left = compose(contract_wedge<S>(n, q, k, j), b00);
      const FormOp<S> right = compose(b00, contract_wedge<S>(n, q, j, k));
      for (int s = 0; s < n; ++s) {
        add_term(w.d({j}, {k, s}) / (L(j) + L(k) + L(s) * S(st.chi1(s))), Block::Z, s, left);
        add_term(w.d({j, s}, {k}) / (L(j) + L(k) + L(s) * S(st.chi2(s))), Block::ZBar, s, left);
        const S ratio = L(s) / ((L(j) + L(k)) * (L(j) + L(k) + L(s)));
        if (s >= q)
          add_term(ratio * w.d({k}, {j, s}), Block::Z, s, right);
        else
          add_term(ratio * w.d({k, s}, {j}), Block::ZBar, s, right);
      }
    }
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < n; ++j) {
      const S d_bar = w.d({j, s}, {j});
      const S d_unbar = w.d({j}, {j, s});
      S cbar = S(0), cz = S(0);
      if (j < q) {
        cbar -= (s >= q ? S(1) / (L(j) + L(s)) : S(1) / L(j)) * d_bar;
        if (s >= q) cz -= L(s) / (L(j) * (L(j) + L(s))) * d_unbar;
      } else {
        if (s < q) {
          cbar += L(s) / (L(j) * (L(j) + L(s))) * d_bar;
          cz += S(1) / (L(j) + L(s)) * d_unbar;
        } else {
          cz += S(1) / L(j) * d_unbar;
        }
      }
      add_term(cbar, Block::ZBar, s, b00);
      add_term(cz, Block::Z, s, b00);
    }
  return bz + adjoint_swap(bz);
}

template <class S>
FormOpJet<S> b01_w_part_closed_form(const WeightJet<S>& w) {
  const int n = w.n, q = w.q, deg = 2;
  const SignTables<S> st(w);
  const FormOp<S> b00 = b0_leading_reduced(w, q);
  const auto L = [&](int j) { return from_real<S>(st.abs_lambda[j]); };
  FormOpJet<S> out(n, q, q, deg);
  for (int j = q; j < n; ++j)
    for (int t = 0; t < q; ++t) {
      const FormOp<S> op = compose(contract_wedge<S>(n, q, t, j), b00);
      for (int s = 0; s < n; ++s) {
        const S ratio = L(s) / ((L(j) + L(t)) * (L(j) + L(t) + L(s)));
        const S coeff = s < q ? ratio * w.d({j}, {t, s}) : ratio * w.d({j, s}, {t});
        if (Field<S>::is_zero(coeff)) continue;
        const Block blk = s < q ? Block::W : Block::WBar;
        out += scale(single_var<S>(n, blk, s, deg, coeff), FormOpJet<S>::constant(op, deg), deg);
      }
    }
  return out;
}

template <class S>
QuadraticFamily<S> b02_diag_closed_form(const WeightJet<S>& w, const PolyJet<S>& psi) {
  const int n = w.n, q = w.q, deg = 2;
  const SignTables<S> st(w);
  const FormOp<S> b00 = b0_leading_reduced(w, q);
  const auto L = [&](int j) { return from_real<S>(st.abs_lambda[j]); };
  const S i = Field<S>::unit();
  const S det = from_real<S>(w.abs_det());

  // Coefficients of tr b01(z, 0) / |l_1 ... l_n|.
  const PolyJet<S> tr = form_trace(b01_closed_form(w));
  std::vector<S> a(n), bb(n);
  for (int s = 0; s < n; ++s) {
    Mono mz, mzb;
    mz.set(block_var(n, Block::Z, s), 1);
    mzb.set(block_var(n, Block::ZBar, s), 1);
    a[s] = tr.coeff(mz) / det;
    bb[s] = tr.coeff(mzb) / det;
  }

  FormOpJet<S> fam(n, q, q, deg);
  auto add = [&](const S& coeff, int s, const FormOp<S>& op) {
    if (Field<S>::is_zero(coeff)) return;
    Mono m;
    m.set(block_var(n, Block::ZBar, s), 1);
    m.set(block_var(n, Block::Z, s), 1);
    PolyJet<S> p(n, deg);
    p.add(m, coeff);
    fam += scale(p, FormOpJet<S>::constant(op, deg), deg);
  };
  auto abs2 = [](const S& x) { return x * Field<S>::conj(x); };

  for (int j = q; j < n; ++j)
    for (int k = 0; k < q; ++k) {
      const FormOp<S> sandwich =
          compose(compose(contract_wedge<S>(n, q, k, j), b00), contract_wedge<S>(n, q, j, k));
      for (int s = 0; s < n; ++s) {
        add(abs2(w.d({j}, {k, s})) / (L(s) * (L(j) + L(k) + L(s) * S(st.chi1(s)))), s, b00);
        add(abs2(w.d({j, s}, {k})) / (L(s) * (L(j) + L(k) + L(s) * S(st.chi2(s)))), s, b00);
        const S sum = L(j) + L(k) + L(s);
        const S ratio = L(s) / ((L(j) + L(k)) * sum * sum);
        if (s >= q)
          add(ratio * abs2(w.d({j, s}, {k})), s, sandwich);
        else
          add(ratio * abs2(w.d({j}, {k, s})), s, sandwich);
      }
    }
  for (int u = 0; u < n; ++u)
    for (int s = 0; s < n; ++s) {
      if (u >= q)
        add(-(S(1) / (L(u) + L(s) * S(st.chi1(s)))) * bb[s] * w.d({u}, {u, s}), u, b00);
      else
        add(S(1) / (L(u) + L(s) * S(st.chi2(s))) * a[s] * w.d({u, s}, {u}), u, b00);
    }
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < n; ++s) {
      if (j < q && s >= q) add(-(S(1) / (L(j) + L(s))) * a[s] * w.d({j, s}, {j}), s, b00);
      if (j >= q && s < q) add(S(1) / (L(j) + L(s)) * bb[s] * w.d({j}, {j, s}), s, b00);
    }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const S psi4 = diagonal_quartic_from_jet(psi, std::min(j, k), std::max(j, k));
      const S phi4 = w.d({j, k}, {j, k});
      const S quartic = j < q ? S(-i * psi4 + phi4) : S(i * psi4 + phi4);
      const S coeff = quartic / (S(2) * L(k));
      add(j < q ? S(-coeff) : coeff, k, b00);
    }
  return QuadraticFamily<S>{fam, true};
}

template <class S>
FormOp<S> b1_explicit_closed_form(const WeightJet<S>& w) {
  const int n = w.n, q = w.q;
  const SignTables<S> st(w);
  const FormOp<S> b00 = b0_leading_reduced(w, q);
  const auto L = [&](int j) { return from_real<S>(st.abs_lambda[j]); };
  auto abs2 = [](const S& x) { return x * Field<S>::conj(x); };
  FormOp<S> out(n, q, q);
  for (int j = q; j < n; ++j)
    for (int k = 0; k < q; ++k) {
      const FormOp<S> sandwich =
          compose(compose(contract_wedge<S>(n, q, k, j), b00), contract_wedge<S>(n, q, j, k));
      for (int s = 0; s < n; ++s) {
        const S a = L(j) + L(k), sum = a + L(s);
        const S coeff = L(s) / (S(2) * a * a * sum * sum) * (s < q ? abs2(w.d({j}, {k, s})) : abs2(w.d({j, s}, {k})));
        out += coeff * sandwich;
      }
    }
  return out;
}

template <class S>
TransportResiduals transport_residuals(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b) {
  TransportResiduals res;
  const int cut = 2;
  const FormOpJet<S> bt = truncate(b, cut);
  const TransportData<S> data(w, psi, cut);
  const FormOpJet<S> tz = data.apply(bt);
  const FormOpJet<S> tw = adjoint_swap(data.apply(adjoint_swap(bt)));
  res.order1 = std::max(max_abs(homogeneous_part(tz, 1)), max_abs(homogeneous_part(tw, 1)));
  res.order2 = std::max(max_abs(homogeneous_part(tz, 2)), max_abs(homogeneous_part(tw, 2)));
  res.self_adjoint = max_abs(adjoint_swap(bt) - bt);
  const PolyJet<S> det = signed_hessian_determinant(w, 1);
  PolyJet<S> diff(w.n, truncate<S>(restrict_diagonal(form_trace(bt)), 1));
  diff -= det;
  res.trace_derivative = max_abs(homogeneous_part<S>(diff, 1));
  return res;
}

#define BERGMAN_TRANSPORT_INSTANTIATE(S)                                                              \
  template struct SignTables<S>;                                                                      \
  template FormOp<S> b0_leading_reduced<S>(const WeightJet<S>&, int);                                 \
  template FormOpJet<S> L_apply<S>(const FormOpJet<S>&, const SignTables<S>&);                        \
  template LSolveResult<S> L_solve<S>(const FormOpJet<S>&, const SignTables<S>&, bool);               \
  template FormOpJet<S> transport_operator<S>(const WeightJet<S>&, const PolyJet<S>&, const FormOpJet<S>&, int);   \
  template FormOpJet<S> transport_operator_w<S>(const WeightJet<S>&, const PolyJet<S>&, const FormOpJet<S>&, int); \
  template PolyJet<S> signed_hessian_determinant<S>(const WeightJet<S>&, int);                        \
  template AmplitudeSolution<S> transport_solve_recursive<S>(const WeightJet<S>&, const PhaseJet<S>&, int);        \
  template FormOpJet<S> b01_closed_form<S>(const WeightJet<S>&);                                      \
  template FormOpJet<S> b01_w_part_closed_form<S>(const WeightJet<S>&);                               \
  template QuadraticFamily<S> b02_diag_closed_form<S>(const WeightJet<S>&, const PolyJet<S>&);        \
  template FormOp<S> b1_explicit_closed_form<S>(const WeightJet<S>&);                                 \
  template TransportResiduals transport_residuals<S>(const WeightJet<S>&, const PolyJet<S>&, const FormOpJet<S>&);

BERGMAN_TRANSPORT_INSTANTIATE(Cd)
BERGMAN_TRANSPORT_INSTANTIATE(QComplex)

}  // namespace bergman
