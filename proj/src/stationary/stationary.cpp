#include "bergman/stationary.hpp"

#include <Eigen/Eigenvalues>
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

long factorial(int k) {
  long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// (-i)^j as an element of S.
template <class S>
S minus_i_power(int j) {
  const S i = Field<S>::unit();
  S out(1);
  for (int k = 0; k < ((j % 4) + 4) % 4; ++k) out = out * (-i);
  return out;
}

// Gauss-Jordan inverse of a small dense matrix (row-major).
template <class S>
std::vector<S> invert(std::vector<S> a, int dim) {
  std::vector<S> inv(static_cast<std::size_t>(dim) * dim, S(0));
  for (int k = 0; k < dim; ++k) inv[k * dim + k] = S(1);
  double scale = 0.0;
  for (const S& x : a) scale = std::max(scale, Field<S>::magnitude(x));
  for (int col = 0; col < dim; ++col) {
    int pivot = -1;
    double best = 0.0;
    for (int r = col; r < dim; ++r) {
      const double m = Field<S>::magnitude(a[r * dim + col]);
      if (Field<S>::is_zero(a[r * dim + col])) continue;
      if (pivot < 0 || m > best) {
        pivot = r;
        best = m;
        if constexpr (Field<S>::exact) break;
      }
    }
    if (pivot < 0 || (!Field<S>::exact && best <= 1e-13 * std::max(1.0, scale)))
      throw NumericalError("stationary phase: the Hessian of the phase is singular");
    if (pivot != col)
      for (int c = 0; c < dim; ++c) {
        std::swap(a[pivot * dim + c], a[col * dim + c]);
        std::swap(inv[pivot * dim + c], inv[col * dim + c]);
      }
    const S p = S(1) / a[col * dim + col];
    for (int c = 0; c < dim; ++c) {
      a[col * dim + c] = a[col * dim + c] * p;
      inv[col * dim + c] = inv[col * dim + c] * p;
    }
    for (int r = 0; r < dim; ++r) {
      if (r == col) continue;
      const S factor = a[r * dim + col];
      if (Field<S>::is_zero(factor)) continue;
      for (int c = 0; c < dim; ++c) {
        a[r * dim + c] = a[r * dim + c] - factor * a[col * dim + c];
        inv[r * dim + c] = inv[r * dim + c] - factor * inv[col * dim + c];
      }
    }
  }
  return inv;
}

// <f''^{-1} D, D> = -sum_{a,b} A_ab d_a d_b.
template <class S>
Poly<S> apply_P(const RealQuadraticPhase<S>& phase, const Poly<S>& h) {
  const int dim = 2 * phase.n;
  Poly<S> out(h.nvars(), h.max_degree());
  for (int a = 0; a < dim; ++a) {
    const Poly<S> da = diff(h, a);
    if (da.empty()) continue;
    for (int b = 0; b < dim; ++b) {
      const S coeff = -phase.hessian_inverse[a * dim + b];
      if (Field<S>::is_zero(coeff)) continue;
      Poly<S> dab = diff(da, b);
      dab *= coeff;
      out += dab;
    }
  }
  return out;
}

// P^nu (h)(0), reading only the degree-2nu part of h.
template <class S>
S apply_P_power_at_zero(const RealQuadraticPhase<S>& phase, const Poly<S>& h, int nu) {
  Poly<S> cur = homogeneous_part(h, 2 * nu);
  for (int k = 0; k < nu; ++k) cur = apply_P(phase, cur);
  return cur.coeff(Mono{});
}

struct HormanderTerm {
  int nu, mu;
};

std::vector<HormanderTerm> hormander_terms(int j) {
  std::vector<HormanderTerm> out;
  for (int mu = 0; mu <= 2 * j; ++mu) {
    const int nu = j + mu;
    if (2 * nu >= 3 * mu) out.push_back({nu, mu});
  }
  return out;
}

// d^{|a|+|b|} p / dzbar^a dz^b (0) for a z-jet.
template <class S>
S derivative_at_zero(const PolyJet<S>& p, std::initializer_list<int> bars, std::initializer_list<int> unbars) {
  const int n = p.n();
  Mono m;
  for (int j : bars) m.set(block_var(n, Block::ZBar, j), m.exp(block_var(n, Block::ZBar, j)) + 1);
  for (int j : unbars) m.set(block_var(n, Block::Z, j), m.exp(block_var(n, Block::Z, j)) + 1);
  long fact = 1;
  for (int v = 0; v < 2 * n; ++v) fact *= factorial(m.exp(v));
  return p.coeff(m) * S(fact);
}

template <class S>
FormOp<S> derivative_at_zero(const FormOpJet<S>& b, std::initializer_list<int> bars, std::initializer_list<int> unbars) {
  FormOp<S> out(b.n(), b.q_in(), b.q_out());
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) out.at(r, c) = derivative_at_zero(b.at(r, c), bars, unbars);
  return out;
}

template <class S>
S abs2(const S& x) {
  return x * Field<S>::conj(x);
}

// Shorthand for the weight data entering the closed forms.
template <class S>
struct WeightData {
  const WeightJet<S>& w;
  int n, q;
  std::vector<S> L;
  explicit WeightData(const WeightJet<S>& wj) : w(wj), n(wj.n), q(wj.q), L(wj.n) {
    for (int j = 0; j < n; ++j) L[j] = from_real<S>(wj.abs_lambda(j));
  }
  bool neg(int j) const { return j < q; }
  // |d^3 phi / dzbar_s dz_j dz_t|^2
  S cube2(int s, int j, int t) const { return abs2(w.d({s}, {j, t})); }
  // d^3 phi / dzbar_j dz_j dz_s and d^3 phi / dzbar_t dz_t dzbar_s
  S A(int j, int s) const { return w.d({j}, {j, s}); }
  S B(int t, int s) const { return w.d({t, s}, {t}); }
  S AB(int j, int t, int s) const { return A(j, s) * B(t, s); }
  S ABsym(int j, int t, int s) const { return A(j, s) * B(t, s) + B(j, s) * A(t, s); }
  S Q4(int j, int t) const { return w.d({j, t}, {j, t}); }
};

template <class S>
S alpha_coeff(const WeightData<S>& d, int s, int j, int t) {
  const S Ls = d.L[s], Lj = d.L[j], Lt = d.L[t];
  const S sum = Lj + Lt + Ls, sum2 = sum * sum;
  const S inv_pair = S(1) / (Lj + Ls) + S(1) / (Lt + Ls);
  return S(1) / (S(4) * sum2) * (S(1) / Lj + S(1) / Lt) +
         (Lt * Lt * Lj * Ls - Lj * Lj * Lt * Lt) / (S(2) * Lj * Lt * Ls * (Lj + Ls) * sum2) * inv_pair +
         (Lt * Lj * Lj * Ls - Lj * Lj * Lt * Lt) / (S(2) * Lj * Lt * Ls * (Lt + Ls) * sum2) * inv_pair;
}

template <class S>
S beta_coeff(const WeightData<S>& d, int s, int j, int t) {
  const S Ls = d.L[s], Lj = d.L[j], Lt = d.L[t];
  const S sum = Lj + Lt + Ls, sum2 = sum * sum;
  const S inv_pair = S(1) / (Lj + Ls) + S(1) / (Lt + Ls);
  return -(S(1) / (S(2) * sum2 * Lj * Lt)) * (sum - Lj * Lt / (Lj + Ls) - Lj * Lt / (Lt + Ls)) -
         S(1) / S(2) * Lt / ((Lj + Ls) * sum2) * inv_pair - S(1) / S(2) * Lj / ((Lt + Ls) * sum2) * inv_pair;
}

template <class S>
S gamma_coeff(const WeightData<S>& d, int s, int j, int t) {
  const S Ls = d.L[s], Lj = d.L[j], Lt = d.L[t];
  const S sum = Lj + Lt + Ls;
  const S jt = Lj * Lt, sj = Ls + Lj, st = Ls + Lt;
  return S(1) / (Lj * Lt * Ls * sum * sum) *
         (Ls * Ls + jt * jt / (sj * sj) + jt * jt / (st * st) - S(2) * jt * Ls / sj - S(2) * jt * Ls / st +
          S(2) * jt * jt / (sj * st));
}

}  // namespace

template <class S>
Poly<S> to_real_coordinates(const PolyJet<S>& a) {
  const int n = a.n();
  const S i = Field<S>::unit();
  std::vector<LinearForm<S>> image(4 * n);
  for (int j = 0; j < n; ++j) {
    image[block_var(n, Block::ZBar, j)] = {{2 * j, S(1)}, {2 * j + 1, -i}};
    image[block_var(n, Block::Z, j)] = {{2 * j, S(1)}, {2 * j + 1, i}};
  }
  a.for_each([&](const Mono& m, const S&) {
    for (int j = 0; j < n; ++j)
      if (m.exp(block_var(n, Block::WBar, j)) || m.exp(block_var(n, Block::W, j)))
        throw StructuralError("to_real_coordinates: jet depends on the second point");
  });
  return substitute_linear<S>(a, image, 2 * n);
}

template <class S>
RealQuadraticPhase<S> make_real_phase(const PolyJet<S>& f) {
  RealQuadraticPhase<S> out;
  out.n = f.n();
  const int dim = 2 * out.n;
  const Poly<S> real = to_real_coordinates(f);
  if (!homogeneous_part(real, 0).empty() || !homogeneous_part(real, 1).empty())
    throw ValidationError("stationary phase: the phase must vanish to second order at the critical point");
  out.hessian.assign(static_cast<std::size_t>(dim) * dim, S(0));
  for (const auto& [m, c] : homogeneous_part(real, 2).sorted_terms()) {
    std::vector<int> vars;
    for (int v = 0; v < dim; ++v)
      for (int e = 0; e < m.exp(v); ++e) vars.push_back(v);
    if (vars[0] == vars[1]) {
      out.hessian[vars[0] * dim + vars[0]] = c * S(2);
    } else {
      out.hessian[vars[0] * dim + vars[1]] = c;
      out.hessian[vars[1] * dim + vars[0]] = c;
    }
  }
  out.hessian_inverse = invert(out.hessian, dim);
  out.remainder = real;
  for (int d = 0; d <= std::min(2, real.max_degree()); ++d) out.remainder -= homogeneous_part(real, d);
  return out;
}

template <class S>
S hormander_Lj(const RealQuadraticPhase<S>& phase, const Poly<S>& u, int j, int u_degree) {
  if (j < 0 || j > 2) throw ValidationError("hormander_Lj: only j <= 2 is supported");
  S total(0);
  for (const auto& [nu, mu] : hormander_terms(j)) {
    const int need = 2 * nu - 3 * mu;  // degree of u reached by this term
    if (need > u_degree) throw ValidationError("hormander_Lj: amplitude jet too short");
    const int cut = 2 * nu;
    Poly<S> h = truncate(u, cut);
    for (int k = 0; k < mu; ++k) h = multiply(h, truncate(phase.remainder, cut), cut);
    S term = apply_P_power_at_zero(phase, h, nu);
    if (Field<S>::is_zero(term)) continue;
    // i^{-j} 2^{-nu} / (nu! mu!)
    term = term * minus_i_power<S>(j) / S(static_cast<long>(1L << nu) * factorial(nu) * factorial(mu));
    total += term;
  }
  return total;
}

template <class S>
FormOp<S> hormander_Lj(const RealQuadraticPhase<S>& phase, const FormOpJet<S>& u, int j) {
  FormOp<S> out(u.n(), u.q_in(), u.q_out());
  for (int r = 0; r < u.rows(); ++r)
    for (int c = 0; c < u.cols(); ++c)
      out.at(r, c) = hormander_Lj(phase, to_real_coordinates(u.at(r, c)), j, u.max_degree());
  return out;
}

Cd stationary_phase_sum(const RealQuadraticPhase<Cd>& phase, const Poly<Cd>& u, int u_degree, double k, int order) {
  const int dim = 2 * phase.n;
  Eigen::MatrixXcd m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) m(a, b) = phase.hessian[a * dim + b] / Cd(0.0, 1.0);
  const Eigen::VectorXcd eig = m.eigenvalues();
  Cd prefactor(std::pow(2.0, phase.n), 0.0);
  for (int a = 0; a < dim; ++a) {
    if (eig(a).real() <= 0.0) throw NumericalError("stationary_phase_sum: Im f'' is not positive definite");
    prefactor /= std::sqrt(eig(a) * (k / (2.0 * std::numbers::pi)));
  }
  Cd sum = 0.0;
  for (int j = 0; j <= order; ++j) sum += std::pow(k, -j) * hormander_Lj(phase, u, j, u_degree);
  return prefactor * sum;
}

template <class S>
IdempotenceData<S> idempotence_data(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b0) {
  IdempotenceData<S> out;
  out.phase = restrict_w_zero(psi);
  out.phase += restrict_z_zero_as_z(psi);
  out.phase = PolyJet<S>(w.n, truncate<S>(out.phase, 4));
  const FormOpJet<S> b = truncate(b0, 2);
  out.right = b.map([](const PolyJet<S>& p) { return restrict_w_zero(p); });
  out.left = b.map([](const PolyJet<S>& p) { return restrict_z_zero_as_z(p); });
  return out;
}

template <class S>
FormOp<S> C0_generic(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b0) {
  const IdempotenceData<S> data = idempotence_data(w, psi, b0);
  const RealQuadraticPhase<S> phase = make_real_phase(data.phase);
  return hormander_Lj(phase, compose(data.left, data.right, 2), 1);
}

template <class S>
C0Parts<S> C0_value(const WeightJet<S>& w, const PolyJet<S>& psi, const FormOpJet<S>& b0) {
  const int n = w.n, q = w.q;
  const IdempotenceData<S> data = idempotence_data(w, psi, b0);
  PolyJet<S> im = data.phase;  // Im psi(z,0) = f / 2i
  im *= S(1) / (S(2) * Field<S>::unit());
  std::vector<S> L(n);
  for (int j = 0; j < n; ++j) L[j] = from_real<S>(w.abs_lambda(j));
  const FormOp<S> B0 = data.right.constant_term();
  const FormOp<S> B0sq = compose(B0, B0);
  const auto& Bz = data.right;
  const auto& Bw = data.left;

  C0Parts<S> out{FormOp<S>(n, q, q), FormOp<S>(n, q, q), FormOp<S>(n, q, q), FormOp<S>(n, q, q), FormOp<S>(n, q, q)};
  for (int j = 0; j < n; ++j) {
    FormOp<S> acc = compose(B0, derivative_at_zero(Bz, {j}, {j}));
    acc += compose(derivative_at_zero(Bw, {j}, {j}), B0);
    acc += compose(derivative_at_zero(Bw, {j}, {}), derivative_at_zero(Bz, {}, {j}));
    acc += compose(derivative_at_zero(Bw, {}, {j}), derivative_at_zero(Bz, {j}, {}));
    out.I += (S(1) / (S(2) * L[j])) * acc;
  }
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < n; ++t)
      out.II += (-(S(1) / (S(4) * L[j] * L[t])) * derivative_at_zero(im, {j, t}, {j, t})) * B0sq;
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < n; ++s) {
      const S c = -(S(1) / (S(2) * L[j] * L[s]));
      const FormOp<S> dz = compose(derivative_at_zero(Bw, {}, {s}), B0) + compose(B0, derivative_at_zero(Bz, {}, {s}));
      const FormOp<S> dzb = compose(derivative_at_zero(Bw, {s}, {}), B0) + compose(B0, derivative_at_zero(Bz, {s}, {}));
      out.III += (c * derivative_at_zero(im, {j, s}, {j})) * dz;
      out.III += (c * derivative_at_zero(im, {j}, {j, s})) * dzb;
    }
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < n; ++s) {
        const S inv = S(1) / (L[j] * L[t] * L[s]);
        out.IV += (S(1) / S(4) * inv * abs2(derivative_at_zero(im, {s}, {j, t}))) * B0sq;
        out.V += (S(1) / S(2) * inv * derivative_at_zero(im, {j, s}, {j}) * derivative_at_zero(im, {t}, {t, s})) * B0sq;
        out.V += (S(1) / S(12) * inv * abs2(derivative_at_zero(im, {}, {j, t, s}))) * B0sq;
      }
  return out;
}

template <class S>
S imag_psi_third_closed_form(const WeightJet<S>& w, int s, int j, int t) {
  const WeightData<S> d(w);
  const S Ls = d.L[s], Lj = d.L[j], Lt = d.L[t];
  const S phi = w.d({s}, {j, t});
  const bool ns = d.neg(s), nj = d.neg(j), nt = d.neg(t);
  const int negs_jt = (nj ? 1 : 0) + (nt ? 1 : 0);
  if (!ns) {
    if (negs_jt == 0) return phi;
    if (negs_jt == 1) return (nj ? Ls / (Ls + Lj) : Ls / (Ls + Lt)) * phi;
    return (Ls - Lj * Lt / (Lj + Ls) - Lj * Lt / (Ls + Lt)) / (Lj + Lt + Ls) * phi;
  }
  if (negs_jt == 2) return -phi;
  if (negs_jt == 1) return -(nt ? Ls / (Lj + Ls) : Ls / (Lt + Ls)) * phi;
  return (-Ls + Lt * Lj / (Lj + Ls) + Lt * Lj / (Ls + Lt)) / (Lj + Lt + Ls) * phi;
}

template <class S>
C0HatParts<S> C0_hat_closed_form(const WeightJet<S>& w) {
  const WeightData<S> d(w);
  const int n = d.n;
  const auto& L = d.L;
  C0HatParts<S> out;
  const S half = S(1) / S(2), quarter = S(1) / S(4);
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < n; ++s) {
        const bool nj = d.neg(j), nt = d.neg(t), ns = d.neg(s);
        const S Lj = L[j], Lt = L[t], Ls = L[s];
        const S c2 = d.cube2(s, j, t);
        const S inv3 = S(1) / (Lj * Lt * Ls);
        // I
        if (!nj && nt && ns)
          out.I += (S(3) * Lj * Lj * Lt - Lt * Lt * Lj - S(2) * Lt * Lt * Ls + S(2) * Lj * Lt * Ls) /
                   (S(2) * (Lj + Ls) * (Lj + Ls) * Lj * Lt * Lt * (Lj + Lt)) * c2;
        if (!nj && !nt && ns) out.I += alpha_coeff(d, s, j, t) * c2;
        if (!nj && !ns && nt)
          out.I += (S(3) * Lj * Lt * Lt - Lt * Lj * Lj - S(2) * Lj * Lj * Ls + S(2) * Lj * Lt * Ls) /
                   (S(2) * (Lt + Ls) * (Lt + Ls) * Lj * Lj * Lt * (Lj + Lt)) * c2;
        if (nj && nt && !ns) out.I += alpha_coeff(d, s, j, t) * c2;
        if ((!nj && !nt && ns) || (nj && nt && !ns))
          out.I += half * (-Ls * Ls + Lj * Lt + Ls * (Lj + Lt)) / ((Lj + Ls) * (Lt + Ls) * Lj * Lt * Ls) * d.AB(j, t, s);
        if (!nj && nt && ns)
          out.I += half * (Lj * Lt * Ls - Lj * Lj * Lt - Lj * Lt * Lt - Ls * Lt * Lt) /
                   ((Lj + Ls) * (Lj + Lt) * Lj * Lt * Lt * Ls) * d.ABsym(j, t, s);
        if (!nj && !ns && nt)
          out.I += half * (Lj * Lt * Ls - Lj * Lj * Lt - Lj * Lt * Lt - Ls * Lj * Lj) /
                   ((Lt + Ls) * (Lj + Lt) * Lj * Lj * Lt * Ls) * d.ABsym(j, t, s);
        if ((!nj && !nt && !ns) || (nj && nt && ns)) out.I += half * inv3 * d.AB(j, t, s);
        // II
        if ((!nj && !nt && ns) || (nj && nt && !ns)) out.II += beta_coeff(d, s, j, t) * c2;
        if (ns && nt && !nj) out.II -= S(1) / (Lt * (Lj + Lt) * (Ls + Lj)) * c2;
        if (!ns && !nj && nt) out.II -= S(1) / (Lj * (Lj + Lt) * (Ls + Lt)) * c2;
        if (ns && nt && !nj) out.II -= half / (Lt * (Lj + Ls) * (Lj + Lt)) * d.ABsym(j, t, s);
        if (!ns && !nj && nt) out.II -= half / (Lj * (Lt + Ls) * (Lj + Lt)) * d.ABsym(j, t, s);
        // III
        if (nj && nt && ns) out.III -= inv3 * d.AB(j, t, s);
        if (!nj && nt && ns) out.III += half * (S(2) * Lj + Ls) / (Lj * Lt * Ls * (Lj + Ls)) * d.ABsym(j, t, s);
        if (!nj && !nt && ns) out.III -= half * Lj / (Lj * Lt * Ls * (Lj + Ls)) * d.ABsym(j, t, s);
        if (!nj && !nt && !ns) out.III -= inv3 * d.AB(j, t, s);
        if (!nj && !ns && nt) out.III += half * (S(2) * Lt + Ls) / (Lj * Lt * Ls * (Lt + Ls)) * d.ABsym(j, t, s);
        if (!ns && nj && nt) out.III -= half * Lt / (Lj * Lt * Ls * (Lt + Ls)) * d.ABsym(j, t, s);
        // IV
        if (!nj && !nt && !ns) out.IV += quarter * inv3 * c2;
        if (!nj && !ns && nt) out.IV += half * Ls / (Lj * Lt * (Ls + Lt) * (Ls + Lt)) * c2;
        if (!ns && nj && nt) out.IV += quarter * gamma_coeff(d, s, j, t) * c2;
        if (nj && nt && ns) out.IV += quarter * inv3 * c2;
        if (ns && nt && !nj) out.IV += half * Ls / (Lj * Lt * (Ls + Lj) * (Ls + Lj)) * c2;
        if (ns && !nj && !nt) out.IV += quarter * gamma_coeff(d, s, j, t) * c2;
        // V
        if (!nj && !nt && !ns) out.V += half * inv3 * d.AB(j, t, s);
        if (!ns && !nj && nt) out.V -= half / ((Lt + Ls) * Lj * Ls) * d.ABsym(j, t, s);
        if (!ns && nj && nt) out.V += half / ((Lt + Ls) * (Lj + Ls) * Ls) * d.AB(j, t, s);
        if (nj && nt && ns) out.V += half * inv3 * d.AB(j, t, s);
        if (ns && nt && !nj) out.V -= half / ((Lj + Ls) * Lt * Ls) * d.ABsym(j, t, s);
        if (ns && !nj && !nt) out.V += half / ((Lt + Ls) * (Lj + Ls) * Ls) * d.AB(j, t, s);
      }
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < n; ++t) {
      const bool nj = d.neg(j), nt = d.neg(t);
      const S Lj = L[j], Lt = L[t];
      const S q4 = d.Q4(j, t);
      if (!nj && nt) {
        out.I += S(1) / (Lj * Lt) * (Lj - Lt) / (Lj + Lt) * q4;
        out.II -= half * (Lj - Lt) / (Lj * Lt * (Lj + Lt)) * q4;
      }
      if (nj && nt) out.II += quarter / (Lj * Lt) * q4;
      if (!nj && !nt) out.II -= quarter / (Lj * Lt) * q4;
    }
  return out;
}

template <class S>
S c_closed_form(const WeightJet<S>& w) {
  const WeightData<S> d(w);
  const int n = d.n;
  const auto& L = d.L;
  const S half = S(1) / S(2), quarter = S(1) / S(4);
  S c(0);
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < n; ++t) {
      const bool nj = d.neg(j), nt = d.neg(t);
      const S Lj = L[j], Lt = L[t];
      const S q4 = d.Q4(j, t);
      if (nj && nt) c -= quarter / (Lj * Lt) * q4;
      if (!nj && !nt) c += quarter / (Lj * Lt) * q4;
      if (!nj && nt) c -= half * (Lj - Lt) / (Lj * Lt * (Lj + Lt)) * q4;
    }
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < n; ++s) {
        const bool nj = d.neg(j), nt = d.neg(t), ns = d.neg(s);
        const S Lj = L[j], Lt = L[t], Ls = L[s];
        const S c2 = d.cube2(s, j, t);
        const S sum = Lj + Lt + Ls;
        if (!nj && nt && ns) c -= half * (Lj - Lt) / (Lj * Lt * (Lj + Lt) * (Ls + Lj)) * c2;
        if (!nj && !ns && nt) c += half * (Lj - Lt) / (Lj * Lt * (Lj + Lt) * (Ls + Lt)) * c2;
        if ((!nj && !nt && ns) || (!ns && nj && nt)) {
          const S pair = S(1) / (Lj + Ls) + S(1) / (Lt + Ls);
          c += quarter * (Lt * Lt * Lj * Lj / (Ls * Lj * Lt * sum * sum) * pair * pair + S(1) / (sum * Lj * Lt)) * c2;
        }
        if (nj && nt && ns) c -= quarter / (Lj * Lt * Ls) * c2;
        if (!nj && !nt && !ns) c -= quarter / (Lj * Lt * Ls) * c2;
        if ((!nj && !nt && ns) || (nj && nt && !ns))
          c += half * Ls / (Lj * Lt * (Lj + Ls) * (Lt + Ls)) * d.AB(j, t, s);
        if (ns && nt && !nj) c -= half / ((Lj + Lt) * (Lj + Ls) * Lt) * d.ABsym(j, t, s);
        if (nt && !nj && !ns) c -= half / ((Lj + Lt) * (Lt + Ls) * Lj) * d.ABsym(j, t, s);
      }
  return c;
}

template <class S>
S c_from_C0(const WeightJet<S>& w, const FormOp<S>& C0_reduced) {
  const S det = from_real<S>(w.abs_det());
  return -hat_component(C0_reduced) / (det * det);
}

template <class S>
CConstant<S> c_constant(const WeightJet<S>& w, double tol, bool strict) {
  CConstant<S> out;
  out.closed_form = c_closed_form(w);
  const PhaseJet<S> psi = phase_solve_recursive(w, 5);
  const AmplitudeSolution<S> amp = transport_solve_recursive(w, psi, 2);
  out.hat_route = c_from_C0(w, C0_generic(w, psi.psi, amp.b0));
  const double diff = Field<S>::magnitude(S(out.closed_form - out.hat_route));
  const double scale = std::max({Field<S>::magnitude(out.closed_form), Field<S>::magnitude(out.hat_route), 1e-300});
  out.discrepancy = diff == 0.0 ? 0.0 : diff / scale;
  if (strict && out.discrepancy > tol) {
    std::ostringstream os;
    os << "c cross-check failure: closed form " << Field<S>::str(Field<S>::re(out.closed_form)) << ", hat route "
       << Field<S>::str(Field<S>::re(out.hat_route)) << ", relative discrepancy " << out.discrepancy;
    throw NumericalError(os.str());
  }
  return out;
}

#define BERGMAN_STATIONARY_INSTANTIATE(S)                                                                   \
  template Poly<S> to_real_coordinates<S>(const PolyJet<S>&);                                               \
  template RealQuadraticPhase<S> make_real_phase<S>(const PolyJet<S>&);                                     \
  template S hormander_Lj<S>(const RealQuadraticPhase<S>&, const Poly<S>&, int, int);                       \
  template FormOp<S> hormander_Lj<S>(const RealQuadraticPhase<S>&, const FormOpJet<S>&, int);               \
  template IdempotenceData<S> idempotence_data<S>(const WeightJet<S>&, const PolyJet<S>&, const FormOpJet<S>&); \
  template FormOp<S> C0_generic<S>(const WeightJet<S>&, const PolyJet<S>&, const FormOpJet<S>&);            \
  template C0Parts<S> C0_value<S>(const WeightJet<S>&, const PolyJet<S>&, const FormOpJet<S>&);             \
  template C0HatParts<S> C0_hat_closed_form<S>(const WeightJet<S>&);                                        \
  template S imag_psi_third_closed_form<S>(const WeightJet<S>&, int, int, int);                             \
  template S c_closed_form<S>(const WeightJet<S>&);                                                         \
  template S c_from_C0<S>(const WeightJet<S>&, const FormOp<S>&);                                           \
  template CConstant<S> c_constant<S>(const WeightJet<S>&, double, bool);

BERGMAN_STATIONARY_INSTANTIATE(Cd)
BERGMAN_STATIONARY_INSTANTIATE(QComplex)

}  // namespace bergman
