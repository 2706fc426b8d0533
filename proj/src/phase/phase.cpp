#include "bergman/phase.hpp"

#include <cmath>
#include <sstream>

namespace bergman {

namespace {

struct VarExp {
  Block block;
  int index;
};

Mono make_mono(int n, std::initializer_list<VarExp> factors) {
  Mono m;
  for (const auto& f : factors) {
    const int v = block_var(n, f.block, f.index);
    m.set(v, m.exp(v) + 1);
  }
  return m;
}

template <class S>
S imag_unit() {
  return Field<S>::unit();
}

template <class S>
std::vector<RealOf<S>> abs_lambdas(const WeightJet<S>& w) {
  std::vector<RealOf<S>> out(w.n);
  for (int j = 0; j < w.n; ++j) out[j] = w.abs_lambda(j);
  return out;
}

template <class S>
PolyJet<S> phi_with_cutoff(const WeightJet<S>& w, int cutoff) {
  return PolyJet<S>(w.n, truncate<S>(w.phi, cutoff));
}

template <class S>
bool negligible(const S& value, double scale) {
  if constexpr (Field<S>::exact)
    return Field<S>::is_zero(value);
  else
    return Field<S>::magnitude(value) <= 1e-9 * std::max(1.0, scale);
}

}  // namespace

template <class S>
PhaseJet<S> phase_order2(const WeightJet<S>& w, int max_degree) {
  const int n = w.n;
  const S i = imag_unit<S>();
  PhaseJet<S> out;
  out.psi = PolyJet<S>(n, max_degree);
  for (int j = 0; j < n; ++j) {
    const S l(w.lambda[j]);
    const S a(w.abs_lambda(j));
    out.psi.add(make_mono(n, {{Block::ZBar, j}, {Block::Z, j}}), i * a);
    out.psi.add(make_mono(n, {{Block::WBar, j}, {Block::W, j}}), i * a);
    out.psi.add(make_mono(n, {{Block::ZBar, j}, {Block::W, j}}), i * (l - a));
    out.psi.add(make_mono(n, {{Block::WBar, j}, {Block::Z, j}}), -i * (a + l));
  }
  out.complete_order = 2;
  return out;
}

template <class S>
PolyJet<S> eikonal_z(const WeightJet<S>& w, const PolyJet<S>& psi, int cutoff) {
  const int n = w.n;
  const S i = imag_unit<S>();
  const PolyJet<S> phi = phi_with_cutoff(w, psi.max_degree());
  PolyJet<S> out(n, cutoff);
  for (int j = 0; j < n; ++j) {
    PolyJet<S> left = jet_diff(phi, Block::ZBar, j);
    left += PolyJet<S>(n, i * jet_diff(psi, Block::ZBar, j));
    PolyJet<S> right = jet_diff(phi, Block::Z, j);
    right += PolyJet<S>(n, -i * jet_diff(psi, Block::Z, j));
    out += PolyJet<S>(n, multiply<S>(left, right, cutoff));
  }
  return out;
}

template <class S>
PolyJet<S> eikonal_w(const WeightJet<S>& w, const PolyJet<S>& psi, int cutoff) {
  const int n = w.n;
  const S i = imag_unit<S>();
  const PolyJet<S> phi_w = relabel_z_as_w(phi_with_cutoff(w, psi.max_degree()));
  PolyJet<S> out(n, cutoff);
  for (int j = 0; j < n; ++j) {
    PolyJet<S> left = jet_diff(phi_w, Block::W, j);
    left += PolyJet<S>(n, i * jet_diff(psi, Block::W, j));
    PolyJet<S> right = jet_diff(phi_w, Block::WBar, j);
    right += PolyJet<S>(n, -i * jet_diff(psi, Block::WBar, j));
    out += PolyJet<S>(n, multiply<S>(left, right, cutoff));
  }
  return out;
}

template <class S>
PolyJet<S> to_adapted(const PolyJet<S>& a, int q) {
  const int n = a.n();
  std::vector<LinearForm<S>> image(4 * n);
  for (int v = 0; v < 4 * n; ++v) image[v] = {{v, S(1)}};
  for (int j = 0; j < n; ++j) {
    if (j < q) {
      image[block_var(n, Block::Z, j)].push_back({block_var(n, Block::W, j), S(1)});
      image[block_var(n, Block::WBar, j)].push_back({block_var(n, Block::ZBar, j), S(1)});
    } else {
      image[block_var(n, Block::ZBar, j)].push_back({block_var(n, Block::WBar, j), S(1)});
      image[block_var(n, Block::W, j)].push_back({block_var(n, Block::Z, j), S(1)});
    }
  }
  return PolyJet<S>(n, substitute_linear<S>(a, image, 4 * n));
}

template <class S>
PolyJet<S> from_adapted(const PolyJet<S>& a, int q) {
  const int n = a.n();
  std::vector<LinearForm<S>> image(4 * n);
  for (int v = 0; v < 4 * n; ++v) image[v] = {{v, S(1)}};
  for (int j = 0; j < n; ++j) {
    if (j < q) {
      image[block_var(n, Block::Z, j)].push_back({block_var(n, Block::W, j), S(-1)});
      image[block_var(n, Block::WBar, j)].push_back({block_var(n, Block::ZBar, j), S(-1)});
    } else {
      image[block_var(n, Block::ZBar, j)].push_back({block_var(n, Block::WBar, j), S(-1)});
      image[block_var(n, Block::W, j)].push_back({block_var(n, Block::Z, j), S(-1)});
    }
  }
  return PolyJet<S>(n, substitute_linear<S>(a, image, 4 * n));
}

template <class R>
R adapted_weight_z(const std::vector<R>& abs_lambda, int q, const Mono& m) {
  const int n = static_cast<int>(abs_lambda.size());
  R s = 0;
  for (int j = 0; j < n; ++j) {
    const int e = m.exp(block_var(n, j < q ? Block::Z : Block::ZBar, j));
    if (e) s += R(2 * e) * abs_lambda[j];
  }
  return s;
}

template <class R>
R adapted_weight_w(const std::vector<R>& abs_lambda, int q, const Mono& m) {
  const int n = static_cast<int>(abs_lambda.size());
  R s = 0;
  for (int j = 0; j < n; ++j) {
    const int e = m.exp(block_var(n, j < q ? Block::WBar : Block::W, j));
    if (e) s += R(2 * e) * abs_lambda[j];
  }
  return s;
}

template <class S>
PhaseJet<S> phase_solve_recursive(const WeightJet<S>& w, int order) {
  using Real = RealOf<S>;
  if (order < 2 || order > 6) throw StructuralError("phase_solve_recursive: order must lie in [2, 6]");
  const int n = w.n;
  const S i = imag_unit<S>();
  const std::vector<Real> absl = abs_lambdas(w);
  PhaseJet<S> out = phase_order2(w, order);

  for (int m = 3; m <= order; ++m) {
    PolyJet<S> rz = to_adapted(PolyJet<S>(n, -homogeneous_part<S>(eikonal_z(w, out.psi, m), m)), w.q);
    PolyJet<S> rw = to_adapted(PolyJet<S>(n, -homogeneous_part<S>(eikonal_w(w, out.psi, m), m)), w.q);
    const double scale = std::max(max_abs(rz), max_abs(rw));

    PolyJet<S> step(n, order);
    std::vector<std::string> bad;
    auto visit = [&](const Mono& mono) {
      if (!Field<S>::is_zero(step.coeff(mono))) return;
      const Real dz = adapted_weight_z(absl, w.q, mono);
      const Real dw = adapted_weight_w(absl, w.q, mono);
      const S cz = rz.coeff(mono), cw = rw.coeff(mono);
      S value(0);
      if (dz != 0) {
        value = cz / (i * S(dz));
        if (dw != 0 && !negligible<S>(value - cw / (i * S(dw)), scale)) bad.push_back(monomial_name(n, mono));
      } else if (dw != 0) {
        value = cw / (i * S(dw));
        if (!negligible<S>(cz, scale)) bad.push_back(monomial_name(n, mono));
      } else if (!negligible<S>(cz, scale) || !negligible<S>(cw, scale)) {
        bad.push_back(monomial_name(n, mono));
      }
      step.add(mono, value);
    };
    rz.for_each([&](const Mono& mono, const S&) { visit(mono); });
    rw.for_each([&](const Mono& mono, const S&) { visit(mono); });
    if (!bad.empty()) {
      std::ostringstream os;
      os << "phase underdetermined or inconsistent at degree " << m << ":";
      for (const auto& b : bad) os << " " << b;
      throw NumericalError(os.str());
    }
    // Joint-kernel monomials vanish on the diagonal only if their coefficient
    // is zero, so the diagonal identity leaves them at zero.
    out.psi += from_adapted(step, w.q);
    out.complete_order = m;
  }
  return out;
}

template <class S>
double phase_residual(const WeightJet<S>& w, const PhaseJet<S>& psi, int check_order) {
  return std::max(max_abs_up_to(eikonal_z(w, psi.psi, check_order), check_order),
                  max_abs_up_to(eikonal_w(w, psi.psi, check_order), check_order));
}

template <class S>
PolyJet<S> model_T(const std::vector<RealOf<S>>& lambda, int q, const PolyJet<S>& g) {
  const int n = g.n();
  const S i = imag_unit<S>();
  PolyJet<S> out(n, g.max_degree());
  g.for_each([&](const Mono& m, const S& c) {
    RealOf<S> s = 0;
    for (int j = 0; j < n; ++j) {
      const RealOf<S> a = lambda[j] < 0 ? RealOf<S>(-lambda[j]) : lambda[j];
      const int e = m.exp(block_var(n, j < q ? Block::Z : Block::ZBar, j));
      if (e) s += RealOf<S>(2 * e) * a;
    }
    out.add(m, i * S(s) * c);
  });
  return out;
}

template <class S>
PolyJet<S> model_T_inverse(const std::vector<RealOf<S>>& lambda, int q, const PolyJet<S>& h) {
  const int n = h.n();
  const S i = imag_unit<S>();
  PolyJet<S> out(n, h.max_degree());
  h.for_each([&](const Mono& m, const S& c) {
    RealOf<S> s = 0;
    for (int j = 0; j < n; ++j) {
      const RealOf<S> a = lambda[j] < 0 ? RealOf<S>(-lambda[j]) : lambda[j];
      const int e = m.exp(block_var(n, j < q ? Block::Z : Block::ZBar, j));
      if (e) s += RealOf<S>(2 * e) * a;
    }
    if (s == 0) throw StructuralError("model_T_inverse: right-hand side has a kernel component at " + monomial_name(n, m));
    out.add(m, c / (i * S(s)));
  });
  return out;
}

template <class S>
S diagonal_quartic_from_jet(const PolyJet<S>& psi, int j, int k) {
  const int n = psi.n();
  const Mono m = make_mono(n, {{Block::ZBar, j}, {Block::Z, j}, {Block::ZBar, k}, {Block::Z, k}});
  return psi.coeff(m) * S(j == k ? 4 : 1);
}

template <class S>
std::map<std::pair<int, int>, S> diagonal_quartic_closed_form(const WeightJet<S>& w) {
  using Real = RealOf<S>;
  const int n = w.n, q = w.q;
  const S i = imag_unit<S>();
  auto L = [&](int j) { return S(w.abs_lambda(j)); };
  auto sq = [](const S& x) { return x * Field<S>::conj(x); };
  std::map<std::pair<int, int>, S> out;

  // Mixed block: jp > q (double-primed), km <= q (primed).
  auto mixed = [&](int jp, int km) {
    S total(0);
    const S Lj = L(jp), Lk = L(km);
    for (int t = 0; t < n; ++t) {
      const S Lt = L(t);
      if (t < q) {
        total += S(2) * i * Lj / ((Lj + Lk) * (Lt + Lj)) * sq(w.d({t}, {jp, km}));
        total += S(2) * i * Lt * Lk * Lj / ((Lj + Lk) * (Lt + Lk + Lj) * (Lt + Lk + Lj)) *
                 (S(1) / (Lj + Lt) + S(1) / (Lj + Lk)) * sq(w.d({t, km}, {jp}));
        total += S(2) * i * Lj / ((Lj + Lt) * (Lj + Lk)) * w.d({jp}, {t, jp}) * w.d({t, km}, {km});
      } else {
        total += S(2) * i * Lk / ((Lj + Lk) * (Lt + Lk)) * sq(w.d({t}, {jp, km}));
        total += S(2) * i * Lt * Lk * Lj / ((Lj + Lk) * (Lt + Lk + Lj) * (Lt + Lk + Lj)) *
                 (S(1) / (Lj + Lk) + S(1) / (Lt + Lk)) * sq(w.d({t, jp}, {km}));
        total += S(2) * i * Lk / ((Lk + Lt) * (Lj + Lk)) * w.d({jp}, {t, jp}) * w.d({t, km}, {km});
      }
    }
    const S lsum = S(Real(w.lambda[jp] + w.lambda[km]));
    total += i * lsum / (Lj + Lk) * w.d({jp, km}, {jp, km});
    return total;
  };
  auto positive = [&](int j, int k) {
    S total(0);
    const S Lj = L(j), Lk = L(k);
    for (int t = 0; t < q; ++t) {
      const S Lt = L(t), D = Lt + Lj + Lk;
      total += S(2) * i / (D * D) * (D - Lj * Lk / (Lj + Lt) - Lj * Lk / (Lk + Lt)) * sq(w.d({j, k}, {t}));
    }
    return total + i * w.d({j, k}, {j, k});
  };
  auto negative = [&](int j, int k) {
    S total(0);
    const S Lj = L(j), Lk = L(k);
    for (int t = q; t < n; ++t) {
      const S Lt = L(t), D = Lt + Lj + Lk;
      total += S(2) * i / (D * D) * (D - Lj * Lk / (Lk + Lt) - Lj * Lk / (Lj + Lt)) * sq(w.d({t}, {j, k}));
    }
    return total - i * w.d({j, k}, {j, k});
  };
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      if (j < q && k < q)
        out[{j, k}] = negative(j, k);
      else if (j >= q && k >= q)
        out[{j, k}] = positive(j, k);
      else
        out[{j, k}] = mixed(k, j);
    }
  return out;
}

template <class S>
PhaseJet<S> phase_closed_form(const WeightJet<S>& w, std::vector<PhaseConflict>* conflicts) {
  const int n = w.n, q = w.q;
  const S i = imag_unit<S>();
  auto L = [&](int j) { return S(w.abs_lambda(j)); };
  auto lam = [&](int j) { return S(w.lambda[j]); };

  PhaseJet<S> out = phase_order2(w, 4);
  PolyJet<S> cubic(n, 4);
  std::set<Mono> printed;
  auto put = [&](const Mono& m, const S& c) {
    cubic.add(m, c);
    printed.insert(m);
  };

  // Coefficient of phi for a z-block monomial, d^3 phi / (alpha! beta!).
  const std::vector<int> zvars = z_block_vars(n);
  for_each_monomial(zvars, 3, [&](const Mono& m) {
    const S phic = w.phi.coeff(m);
    S num(0), den(0);
    for (int j = 0; j < n; ++j) {
      const int a = m.exp(block_var(n, Block::ZBar, j)), b = m.exp(block_var(n, Block::Z, j));
      if (j >= q) {
        num += S(a) * lam(j);
        den += S(a) * L(j);
      } else {
        num += S(b) * lam(j);
        den += S(b) * L(j);
      }
    }
    if (Field<S>::is_zero(den)) return;
    put(m, i * num / den * phic);
  });

  // Terms linear in w: z^alpha zbar^beta w_j (j <= q) and ... wbar_j (j > q).
  for_each_monomial(zvars, 2, [&](const Mono& m) {
    S a2(0), b1(0);
    for (int j = 0; j < n; ++j) {
      if (j >= q) a2 += S(m.exp(block_var(n, Block::ZBar, j))) * L(j);
      if (j < q) b1 += S(m.exp(block_var(n, Block::Z, j))) * L(j);
    }
    const S A = a2 + b1;
    for (int j = 0; j < n; ++j) {
      Mono zj = m, full = m;
      if (j < q) {
        if (Field<S>::is_zero(a2)) continue;
        const int v = block_var(n, Block::Z, j);
        zj.set(v, zj.exp(v) + 1);
        full.set(block_var(n, Block::W, j), 1);
        // d^3 phi / dzbar^alpha dz^beta dz_j / (alpha! beta!) = coeff(zj) * (beta_j + 1)
        const S d3 = w.phi.coeff(zj) * S(zj.exp(v));
        put(full, i * d3 * S(2) * L(j) * a2 / (A * (A + L(j))));
      } else {
        if (Field<S>::is_zero(b1)) continue;
        const int v = block_var(n, Block::ZBar, j);
        zj.set(v, zj.exp(v) + 1);
        full.set(block_var(n, Block::WBar, j), 1);
        const S d3 = w.phi.coeff(zj) * S(zj.exp(v));
        put(full, -i * d3 * S(2) * L(j) * b1 / (A * (A + L(j))));
      }
    }
  });

  // Terms quadratic in w.
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < n; ++s) {
        const S Lj = L(j), Lk = L(k), Ls = L(s);
        if (k >= q && j < q && s < q)
          put(make_mono(n, {{Block::ZBar, k}, {Block::W, j}, {Block::W, s}}),
              i * w.d({k}, {j, s}) * Lj * Ls / (Lk + Lj + Ls) * (S(1) / (Lj + Lk) + S(1) / (Lk + Ls)));
        if (k < q && j >= q && s >= q)
          put(make_mono(n, {{Block::Z, k}, {Block::WBar, j}, {Block::WBar, s}}),
              -i * w.d({j, s}, {k}) * Lj * Ls / (Lk + Lj + Ls) * (S(1) / (Lj + Lk) + S(1) / (Lk + Ls)));
      }
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        const S Lj = L(j), Lk = L(k), Ls = L(s);
        if (s >= q && k >= q && j < q)
          put(make_mono(n, {{Block::ZBar, s}, {Block::WBar, k}, {Block::W, j}}),
              i * S(2) * Lj * Lk / ((Ls + Lj) * (Ls + Lj + Lk)) * w.d({s, k}, {j}));
        if (k >= q && j < q && s < q)
          put(make_mono(n, {{Block::Z, s}, {Block::WBar, k}, {Block::W, j}}),
              -i * S(2) * Lj * Lk / ((Ls + Lk) * (Ls + Lj + Lk)) * w.d({k}, {s, j}));
      }

  // psi(z, 0) terms whose z-part lies in the kernel of T.  The sums run over
  // ordered index triples, so the pure (anti)holomorphic cubes carry 1/6: the
  // value forced by psi(z, z) = 0.
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < n; ++s) {
        const S Lj = L(j), Lk = L(k), Ls = L(s), D = Lj + Lk + Ls;
        if (j >= q && k >= q && s < q)
          put(make_mono(n, {{Block::Z, j}, {Block::Z, k}, {Block::ZBar, s}}),
              i / S(2) / D * (-D + S(2) * Lj * Lk / (Lj + Ls) + S(2) * Lj * Lk / (Lk + Ls)) * w.d({s}, {j, k}));
        if (j >= q && k < q && s < q)
          put(make_mono(n, {{Block::Z, j}, {Block::ZBar, k}, {Block::ZBar, s}}),
              i / S(2) / D * (D - S(2) * Lk * Ls / (Lj + Lk) - S(2) * Lk * Ls / (Lj + Ls)) * w.d({k, s}, {j}));
        if (j >= q && k >= q && s >= q)
          put(make_mono(n, {{Block::Z, j}, {Block::Z, k}, {Block::Z, s}}), -i / S(6) * w.d({}, {j, k, s}));
        if (j < q && k < q && s < q)
          put(make_mono(n, {{Block::ZBar, j}, {Block::ZBar, k}, {Block::ZBar, s}}), i / S(6) * w.d({j, k, s}, {}));
      }

  auto record = [&](const Mono& m, const char* source, const S& printed_value, const S& forced) {
    if (!conflicts) return;
    const double scale = std::max(1.0, Field<S>::magnitude(forced));
    if (Field<S>::magnitude(printed_value - forced) <= 1e-10 * scale) return;
    PhaseConflict c;
    c.monomial = monomial_name(n, m);
    c.source = source;
    c.printed = Cd(Field<S>::to_double(Field<S>::re(printed_value)), Field<S>::to_double(Field<S>::im(printed_value)));
    c.forced = Cd(Field<S>::to_double(Field<S>::re(forced)), Field<S>::to_double(Field<S>::im(forced)));
    conflicts->push_back(c);
  };

  // Antisymmetry psi(z, w) = -conj psi(w, z) fills the partners of printed terms.
  PolyJet<S> partners = jet_swap_conjugate(cubic);
  PolyJet<S> filled = cubic;
  partners.for_each([&](const Mono& m, const S& c) {
    if (printed.count(m))
      record(m, "antisymmetry", cubic.coeff(m), c);
    else
      filled.add(m, c);
  });
  std::set<Mono> known = printed;
  partners.for_each([&](const Mono& m, const S&) { known.insert(m); });

  // The diagonal identity psi(z, z) = 0 fixes the rest: every remaining
  // monomial has a distinct image on the diagonal.
  PolyJet<S> diag = restrict_diagonal(filled);
  const std::vector<int> all = all_jet_vars(n);
  for_each_monomial(all, 3, [&](const Mono& m) {
    if (known.count(m)) return;
    bool kernel = true;
    for (int j = 0; j < n; ++j) {
      const Block first = j < q ? Block::Z : Block::ZBar;
      const Block second = j < q ? Block::WBar : Block::W;
      if (m.exp(block_var(n, first, j)) || m.exp(block_var(n, second, j))) kernel = false;
    }
    if (!kernel) return;
    Mono image;
    for (int j = 0; j < n; ++j) {
      image.set(block_var(n, Block::ZBar, j), m.exp(block_var(n, Block::ZBar, j)) + m.exp(block_var(n, Block::WBar, j)));
      image.set(block_var(n, Block::Z, j), m.exp(block_var(n, Block::Z, j)) + m.exp(block_var(n, Block::W, j)));
    }
    filled.add(m, -diag.coeff(image));
  });
  // Printed kernel terms are checked against the diagonal identity as well.
  PolyJet<S> check = restrict_diagonal(filled);
  check.for_each([&](const Mono& m, const S& c) {
    if (m.degree() == 3) record(m, "diagonal", c, S(0));
  });

  out.psi += filled;
  out.complete_order = 3;

  for (const auto& [jk, value] : diagonal_quartic_closed_form(w)) {
    const auto [j, k] = jk;
    const Mono m = make_mono(n, {{Block::ZBar, j}, {Block::Z, j}, {Block::ZBar, k}, {Block::Z, k}});
    out.psi.set(m, value / S(j == k ? 4 : 1));
    out.determined.insert(m);
  }
  return out;
}

#define BERGMAN_PHASE_INSTANTIATE(S)                                                                   \
  template PhaseJet<S> phase_order2<S>(const WeightJet<S>&, int);                                      \
  template PhaseJet<S> phase_solve_recursive<S>(const WeightJet<S>&, int);                             \
  template PhaseJet<S> phase_closed_form<S>(const WeightJet<S>&, std::vector<PhaseConflict>*);         \
  template double phase_residual<S>(const WeightJet<S>&, const PhaseJet<S>&, int);                     \
  template PolyJet<S> eikonal_z<S>(const WeightJet<S>&, const PolyJet<S>&, int);                       \
  template PolyJet<S> eikonal_w<S>(const WeightJet<S>&, const PolyJet<S>&, int);                       \
  template PolyJet<S> model_T<S>(const std::vector<RealOf<S>>&, int, const PolyJet<S>&);               \
  template PolyJet<S> model_T_inverse<S>(const std::vector<RealOf<S>>&, int, const PolyJet<S>&);       \
  template std::map<std::pair<int, int>, S> diagonal_quartic_closed_form<S>(const WeightJet<S>&);      \
  template S diagonal_quartic_from_jet<S>(const PolyJet<S>&, int, int);                                \
  template PolyJet<S> to_adapted<S>(const PolyJet<S>&, int);                                           \
  template PolyJet<S> from_adapted<S>(const PolyJet<S>&, int);                                         \
  template RealOf<S> adapted_weight_z<RealOf<S>>(const std::vector<RealOf<S>>&, int, const Mono&);     \
  template RealOf<S> adapted_weight_w<RealOf<S>>(const std::vector<RealOf<S>>&, int, const Mono&);

BERGMAN_PHASE_INSTANTIATE(Cd)
BERGMAN_PHASE_INSTANTIATE(QComplex)

}  // namespace bergman
