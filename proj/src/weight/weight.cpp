#include "bergman/weight.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace bergman {

mpq_class rational_from_decimal(const std::string& text) {
  std::string s = text;
  if (s.find('/') != std::string::npos) return mpq_class(s);
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s = s.substr(1);
  }
  long exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    exp10 = std::stol(s.substr(e + 1));
    s = s.substr(0, e);
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    exp10 -= static_cast<long>(s.size() - dot - 1);
    s.erase(dot, 1);
  }
  if (s.empty()) throw ValidationError("bad numeric literal '" + text + "'");
  mpz_class num(s, 10);
  mpz_class ten = 10, scale;
  mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(exp10)));
  mpq_class r = exp10 >= 0 ? mpq_class(num * scale) : mpq_class(num, scale);
  r.canonicalize();
  return neg ? mpq_class(-r) : r;
}

namespace {

std::string shortest_decimal(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string pair_name(const std::vector<int>& a, const std::vector<int>& b) {
  std::ostringstream os;
  os << "(alpha=[";
  for (std::size_t k = 0; k < a.size(); ++k) os << (k ? "," : "") << a[k];
  os << "], beta=[";
  for (std::size_t k = 0; k < b.size(); ++k) os << (k ? "," : "") << b[k];
  os << "])";
  return os.str();
}

int factorial(int k) {
  int f = 1;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

template <class S>
PolyJet<S> jet_from_spec(const WeightSpec& spec, const std::vector<S>& coeffs) {
  int maxdeg = 0;
  for (const auto& t : spec.terms)
    maxdeg = std::max(maxdeg, std::accumulate(t.alpha.begin(), t.alpha.end(), 0) +
                                  std::accumulate(t.beta.begin(), t.beta.end(), 0));
  if (maxdeg >= Mono::kMaxExp) throw ValidationError("weight degree too large");
  PolyJet<S> p(spec.n, std::max(maxdeg, 4));
  for (std::size_t k = 0; k < spec.terms.size(); ++k) {
    const auto& t = spec.terms[k];
    Mono m;
    for (int j = 0; j < spec.n; ++j) {
      m.set(block_var(spec.n, Block::ZBar, j), t.alpha[j]);
      m.set(block_var(spec.n, Block::Z, j), t.beta[j]);
    }
    p.add(m, coeffs[k]);
  }
  return p;
}

// phi(p + z), expanded and truncated at degree 4.
template <class S>
PolyJet<S> translate(const PolyJet<S>& phi, const std::vector<S>& p) {
  const int n = phi.n();
  PolyJet<S> out(n, 4);
  // Powers of (z_j + p_j) and (zbar_j + conj p_j) via the binomial theorem.
  phi.for_each([&](const Mono& m, const S& c) {
    Poly<S> term = constant_poly<S>(4 * n, 4, c);
    for (int j = 0; j < n; ++j) {
      for (Block b : {Block::ZBar, Block::Z}) {
        const int v = block_var(n, b, j);
        const int e = m.exp(v);
        if (!e) continue;
        const S shift = b == Block::Z ? p[j] : Field<S>::conj(p[j]);
        Poly<S> lin = variable_poly<S>(4 * n, 4, v);
        lin.add(Mono{}, shift);
        Poly<S> pw = constant_poly<S>(4 * n, 4, S(1));
        for (int k = 0; k < e; ++k) pw = multiply(pw, lin);
        term = multiply(term, pw);
      }
    }
    out += PolyJet<S>(n, term);
  });
  return out;
}

// Split off constant, linear and pure (anti)holomorphic quadratic terms.
template <class S>
void strip_pluriharmonic(PolyJet<S>& phi, PolyJet<S>& removed) {
  const int n = phi.n();
  removed = PolyJet<S>(n, 4);
  PolyJet<S> kept(n, 4);
  phi.for_each([&](const Mono& m, const S& c) {
    int dbar = 0, dz = 0;
    for (int j = 0; j < n; ++j) {
      dbar += m.exp(block_var(n, Block::ZBar, j));
      dz += m.exp(block_var(n, Block::Z, j));
    }
    const bool pluriharmonic = (dbar + dz <= 1) || (dbar + dz == 2 && (dbar == 0 || dz == 0));
    (pluriharmonic ? removed : kept).add(m, c);
  });
  phi = std::move(kept);
}

template <class S>
void check_hermitian(const PolyJet<S>& phi, double tol) {
  const int n = phi.n();
  phi.for_each([&](const Mono& m, const S& c) {
    Mono swapped;
    for (int j = 0; j < n; ++j) {
      swapped.set(block_var(n, Block::ZBar, j), m.exp(block_var(n, Block::Z, j)));
      swapped.set(block_var(n, Block::Z, j), m.exp(block_var(n, Block::ZBar, j)));
    }
    const S partner = phi.coeff(swapped);
    if (Field<S>::magnitude(partner - Field<S>::conj(c)) > tol * std::max(1.0, Field<S>::magnitude(c))) {
      auto idx = PolyJet<S>::split(n, m);
      throw ValidationError("weight is not real: coefficient of zbar^alpha z^beta " + pair_name(idx[0].e, idx[1].e) +
                            " is not the conjugate of its transpose");
    }
  });
}

// Symmetrise c_{alpha,beta} <- (c_{alpha,beta} + conj c_{beta,alpha}) / 2.
PolyJet<Cd> hermitian_part(const PolyJet<Cd>& phi) {
  const int n = phi.n();
  PolyJet<Cd> out(n, phi.max_degree());
  phi.for_each([&](const Mono& m, const Cd& c) {
    Mono swapped;
    for (int j = 0; j < n; ++j) {
      swapped.set(block_var(n, Block::ZBar, j), m.exp(block_var(n, Block::Z, j)));
      swapped.set(block_var(n, Block::Z, j), m.exp(block_var(n, Block::ZBar, j)));
    }
    out.add(m, 0.5 * c);
    out.add(swapped, 0.5 * std::conj(c));
  });
  return out;
}

Mono mixed_quadratic(int n, int j, int k) {
  Mono m;
  m.set(block_var(n, Block::ZBar, j), 1);
  m.set(block_var(n, Block::Z, k), m.exp(block_var(n, Block::Z, k)) + 1);
  return m;
}

// z = U zeta, zbar = conj(U) zetabar.
PolyJet<Cd> rotate(const PolyJet<Cd>& phi, const std::vector<Cd>& U) {
  const int n = phi.n();
  std::vector<LinearForm<Cd>> image(4 * n);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < n; ++a) {
      const Cd u = U[static_cast<std::size_t>(a) * n + j];  // column-major U(j, a)
      if (u == Cd(0)) continue;
      image[block_var(n, Block::Z, j)].push_back({block_var(n, Block::Z, a), u});
      image[block_var(n, Block::ZBar, j)].push_back({block_var(n, Block::ZBar, a), std::conj(u)});
    }
  return PolyJet<Cd>(n, substitute_linear<Cd>(phi, image, 4 * n));
}

std::vector<int> sort_order(const std::vector<double>& lambda) {
  std::vector<int> order(lambda.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const bool na = lambda[a] < 0, nb = lambda[b] < 0;
    if (na != nb) return na;
    return lambda[a] < lambda[b];
  });
  return order;
}

}  // namespace

void validate_spec(const WeightSpec& spec) {
  if (spec.n < 1 || spec.n > 8) throw ValidationError("n must be between 1 and 8");
  if (static_cast<int>(spec.point.size()) != 2 * spec.n)
    throw ValidationError("point must have 2n = " + std::to_string(2 * spec.n) + " real entries");
  std::map<std::pair<std::vector<int>, std::vector<int>>, std::complex<double>> table;
  for (const auto& t : spec.terms) {
    if (static_cast<int>(t.alpha.size()) != spec.n || static_cast<int>(t.beta.size()) != spec.n)
      throw ValidationError("monomial " + pair_name(t.alpha, t.beta) + " has multi-indices of the wrong length");
    for (int e : t.alpha)
      if (e < 0) throw ValidationError("negative exponent in " + pair_name(t.alpha, t.beta));
    for (int e : t.beta)
      if (e < 0) throw ValidationError("negative exponent in " + pair_name(t.alpha, t.beta));
    table[{t.alpha, t.beta}] += std::complex<double>(t.re, t.im);
  }
  for (const auto& [key, c] : table) {
    auto it = table.find({key.second, key.first});
    const std::complex<double> partner = it == table.end() ? 0.0 : it->second;
    if (std::abs(partner - std::conj(c)) > 1e-12 * std::max(1.0, std::abs(c)))
      throw ValidationError("Hermitian symmetry violated: the conjugate partner of " + pair_name(key.first, key.second) +
                            " is missing or wrong");
  }
}

template <class S>
typename WeightJet<S>::Real WeightJet<S>::abs_det() const {
  Real p = 1;
  for (int j = 0; j < n; ++j) p *= abs_lambda(j);
  return p;
}

template <class S>
S WeightJet<S>::derivative(const std::vector<int>& alpha, const std::vector<int>& beta) const {
  Mono m;
  int fact = 1;
  for (int j = 0; j < n; ++j) {
    m.set(block_var(n, Block::ZBar, j), alpha[j]);
    m.set(block_var(n, Block::Z, j), beta[j]);
    fact *= factorial(alpha[j]) * factorial(beta[j]);
  }
  return phi.coeff(m) * S(fact);
}

template <class S>
S WeightJet<S>::d(std::initializer_list<int> bars, std::initializer_list<int> unbars) const {
  std::vector<int> a(n, 0), b(n, 0);
  for (int j : bars) ++a.at(j);
  for (int j : unbars) ++b.at(j);
  return derivative(a, b);
}

template <class S>
WeightJet<S> weight_from_normal_form(const std::vector<RealOf<S>>& lambda, const PolyJet<S>& higher) {
  using Real = RealOf<S>;
  WeightJet<S> w;
  w.n = static_cast<int>(lambda.size());
  w.lambda = lambda;
  for (int j = 0; j < w.n; ++j) {
    if (lambda[j] == 0) throw ValidationError("zero eigenvalue");
    if (j > 0) {
      const bool prev_neg = lambda[j - 1] < 0, neg = lambda[j] < 0;
      if ((!prev_neg && neg) || (prev_neg == neg && lambda[j] < lambda[j - 1]))
        throw ValidationError("eigenvalues must be sorted negatives first, ascending within each block");
    }
    if (lambda[j] < 0) ++w.q;
  }
  w.phi = PolyJet<S>(w.n, 4);
  higher.for_each([&](const Mono& m, const S& c) {
    if (m.degree() >= 3 && m.degree() <= 4) w.phi.add(m, c);
  });
  check_hermitian(w.phi, Field<S>::exact ? 0.0 : 1e-12);
  for (int j = 0; j < w.n; ++j) w.phi.add(mixed_quadratic(w.n, j, j), S(Real(lambda[j])));
  w.removed = PolyJet<S>(w.n, 4);
  w.frame.assign(static_cast<std::size_t>(w.n) * w.n, Cd(0));
  for (int j = 0; j < w.n; ++j) w.frame[static_cast<std::size_t>(j) * w.n + j] = 1.0;
  w.point.assign(2 * w.n, 0.0);
  return w;
}

WeightJet<Cd> normalize_weight(const WeightSpec& spec, double tol_sig) {
  validate_spec(spec);
  const int n = spec.n;
  std::vector<Cd> coeffs;
  for (const auto& t : spec.terms) coeffs.emplace_back(t.re, t.im);
  PolyJet<Cd> raw = jet_from_spec<Cd>(spec, coeffs);
  std::vector<Cd> p(n);
  for (int j = 0; j < n; ++j) p[j] = Cd(spec.point[2 * j], spec.point[2 * j + 1]);
  PolyJet<Cd> phi = hermitian_part(translate(raw, p));
  PolyJet<Cd> removed;
  strip_pluriharmonic(phi, removed);

  Eigen::MatrixXcd H(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) H(j, k) = phi.coeff(mixed_quadratic(n, j, k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("Hessian eigendecomposition failed");
  std::vector<double> ev(n);
  for (int j = 0; j < n; ++j) ev[j] = es.eigenvalues()(j);
  double scale = 0.0;
  for (double e : ev) scale = std::max(scale, std::fabs(e));
  for (double e : ev)
    if (std::fabs(e) <= tol_sig * scale || scale == 0.0) throw ValidationError("degenerate Hessian at the base point");

  const std::vector<int> order = sort_order(ev);
  std::vector<Cd> U(static_cast<std::size_t>(n) * n);
  std::vector<double> lambda(n);
  for (int a = 0; a < n; ++a) {
    lambda[a] = ev[order[a]];
    for (int j = 0; j < n; ++j) U[static_cast<std::size_t>(a) * n + j] = es.eigenvectors()(j, order[a]);
  }
  PolyJet<Cd> rotated = hermitian_part(rotate(phi, U));

  PolyJet<Cd> higher(n, 4);
  rotated.for_each([&](const Mono& m, const Cd& c) {
    if (m.degree() >= 3) higher.add(m, c);
  });
  WeightJet<Cd> w = weight_from_normal_form<Cd>(lambda, higher);
  w.removed = removed;
  w.frame = U;
  w.point = spec.point;
  return w;
}

WeightJet<QComplex> normalize_weight_exact(const WeightSpec& spec) {
  validate_spec(spec);
  const int n = spec.n;
  std::vector<QComplex> coeffs;
  for (const auto& t : spec.terms)
    coeffs.emplace_back(rational_from_decimal(shortest_decimal(t.re)), rational_from_decimal(shortest_decimal(t.im)));
  PolyJet<QComplex> raw = jet_from_spec<QComplex>(spec, coeffs);
  check_hermitian(raw, 0.0);
  std::vector<QComplex> p(n);
  for (int j = 0; j < n; ++j)
    p[j] = QComplex(rational_from_decimal(shortest_decimal(spec.point[2 * j])),
                    rational_from_decimal(shortest_decimal(spec.point[2 * j + 1])));
  PolyJet<QComplex> phi = translate(raw, p);
  PolyJet<QComplex> removed;
  strip_pluriharmonic(phi, removed);

  std::vector<mpq_class> diag(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const QComplex h = phi.coeff(mixed_quadratic(n, j, k));
      if (j != k && !Field<QComplex>::is_zero(h))
        throw ValidationError("exact mode needs a diagonal complex Hessian at the base point");
      if (j == k) {
        if (sgn(h.im) != 0) throw ValidationError("weight is not real");
        if (sgn(h.re) == 0) throw ValidationError("degenerate Hessian at the base point");
        diag[j] = h.re;
      }
    }
  std::vector<double> approx(n);
  for (int j = 0; j < n; ++j) approx[j] = diag[j].get_d();
  std::vector<int> order = sort_order(approx);
  // Exact tie-break on equal doubles keeps the stable order.
  std::vector<mpq_class> lambda(n);
  std::vector<int> target(4 * n, -1);
  for (int a = 0; a < n; ++a) {
    lambda[a] = diag[order[a]];
    target[block_var(n, Block::ZBar, order[a])] = block_var(n, Block::ZBar, a);
    target[block_var(n, Block::Z, order[a])] = block_var(n, Block::Z, a);
  }
  PolyJet<QComplex> permuted(n, remap_variables<QComplex>(phi, target, 4 * n));
  PolyJet<QComplex> higher(n, 4);
  permuted.for_each([&](const Mono& m, const QComplex& c) {
    if (m.degree() >= 3) higher.add(m, c);
  });
  WeightJet<QComplex> w = weight_from_normal_form<QComplex>(lambda, higher);
  w.removed = removed;
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j) w.frame[static_cast<std::size_t>(a) * n + j] = order[a] == j ? 1.0 : 0.0;
  w.point = spec.point;
  return w;
}

WeightJet<Cd> random_normal_weight(const RandomWeightOptions& opt, std::uint64_t seed) {
  if (opt.q < 0 || opt.q > opt.n) throw ValidationError("random weight: q out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.5, 2.5), coef(-1.0, 1.0);
  const int n = opt.n;
  std::vector<double> abs_l(n);
  for (double& a : abs_l) a = mag(rng);
  // Sort within blocks: negatives ascending means |lambda| descending.
  std::sort(abs_l.begin(), abs_l.begin() + opt.q, std::greater<>());
  std::sort(abs_l.begin() + opt.q, abs_l.end());
  int pairs = opt.degenerate_pairs;
  for (int j = 0; j + 1 < n && pairs > 0; ++j) {
    if ((j < opt.q) == (j + 1 < opt.q)) {
      abs_l[j + 1] = abs_l[j];
      --pairs;
      ++j;
    }
  }
  std::vector<double> lambda(n);
  for (int j = 0; j < n; ++j) lambda[j] = j < opt.q ? -abs_l[j] : abs_l[j];

  PolyJet<Cd> higher(n, 4);
  // Enumerate exponent pairs (alpha, beta) with |alpha| + |beta| in {3, 4}
  // and |alpha| <= |beta| up to conjugation.
  const int nv = 2 * n;
  std::vector<int> e(nv, 0);
  std::function<void(int, int)> rec = [&](int v, int left) {
    if (v == nv) {
      if (left != 0) return;
      const int deg = std::accumulate(e.begin(), e.end(), 0);
      int dbar = 0;
      for (int j = 0; j < n; ++j) dbar += e[j];
      const int dz = deg - dbar;
      if (deg == 3 && !opt.cubic) return;
      if (deg == 4 && !opt.quartic) return;
      if ((dbar == 0 || dz == 0) && !opt.pure_holomorphic) return;
      Mono m, sw;
      for (int j = 0; j < n; ++j) {
        m.set(block_var(n, Block::ZBar, j), e[j]);
        m.set(block_var(n, Block::Z, j), e[n + j]);
        sw.set(block_var(n, Block::ZBar, j), e[n + j]);
        sw.set(block_var(n, Block::Z, j), e[j]);
      }
      if (sw < m) return;  // handled with its partner
      Cd c(opt.scale * coef(rng), opt.scale * coef(rng));
      if (sw == m) c = Cd(c.real(), 0.0);
      higher.add(m, c);
      if (sw != m) higher.add(sw, std::conj(c));
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[v] = k;
      rec(v + 1, left - k);
    }
    e[v] = 0;
  };
  rec(0, 3);
  rec(0, 4);
  return weight_from_normal_form<Cd>(lambda, higher);
}

WeightJet<Cd> rotate_weight(const WeightJet<Cd>& w, const std::vector<Cd>& unitary) {
  const int n = w.n;
  PolyJet<Cd> rotated = hermitian_part(rotate(w.phi, unitary));
  PolyJet<Cd> higher(n, 4);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Cd h = rotated.coeff(mixed_quadratic(n, j, k));
      const Cd expect = j == k ? Cd(w.lambda[j]) : Cd(0);
      if (std::abs(h - expect) > 1e-10) throw ValidationError("rotation does not preserve the normal form");
    }
  rotated.for_each([&](const Mono& m, const Cd& c) {
    if (m.degree() >= 3) higher.add(m, c);
  });
  return weight_from_normal_form<Cd>(w.lambda, higher);
}

WeightSpec spec_from_jet(const WeightJet<Cd>& w) {
  WeightSpec spec;
  spec.n = w.n;
  spec.point.assign(2 * w.n, 0.0);
  for (const auto& [m, c] : w.phi.sorted_terms()) {
    WeightTerm t;
    auto idx = PolyJet<Cd>::split(w.n, m);
    t.alpha = idx[0].e;
    t.beta = idx[1].e;
    t.re = c.real();
    t.im = c.imag();
    spec.terms.push_back(t);
  }
  return spec;
}

template struct WeightJet<Cd>;
template struct WeightJet<QComplex>;
template WeightJet<Cd> weight_from_normal_form<Cd>(const std::vector<double>&, const PolyJet<Cd>&);
template WeightJet<QComplex> weight_from_normal_form<QComplex>(const std::vector<mpq_class>&, const PolyJet<QComplex>&);

}  // namespace bergman
