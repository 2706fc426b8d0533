// Shared helpers for the unit tests: seeded generators and small jet builders.
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "bergman/forms.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/stationary.hpp"
#include "bergman/jets.hpp"
#include "bergman/weight.hpp"

namespace testing {

using bergman::Block;
using bergman::Cd;
using bergman::FormOp;
using bergman::FormOpJet;
using bergman::Mono;
using bergman::PolyJet;

// Monomial in the four blocks from exponent lists (each of length n).
inline Mono mono(int n, std::vector<int> zbar, std::vector<int> z, std::vector<int> wbar = {},
                 std::vector<int> w = {}) {
  auto pad = [n](std::vector<int> v) {
    v.resize(n, 0);
    return bergman::MultiIndex{v};
  };
  return PolyJet<Cd>::monomial(n, pad(zbar), pad(z), pad(wbar), pad(w));
}

inline PolyJet<Cd> term(int n, int max_degree, const Mono& m, Cd c) {
  PolyJet<Cd> p(n, max_degree);
  p.add(m, c);
  return p;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Cd complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  // Sparse random jet over all four blocks.
  PolyJet<Cd> jet(int n, int max_degree, int terms) {
    PolyJet<Cd> p(n, max_degree);
    for (int t = 0; t < terms; ++t) {
      Mono m;
      const int degree = integer(0, max_degree);
      for (int d = 0; d < degree; ++d) {
        const int v = integer(0, 4 * n - 1);
        m.set(v, m.exp(v) + 1);
      }
      p.add(m, complex());
    }
    return p;
  }

  FormOp<Cd> op(int n, int q) {
    FormOp<Cd> f(n, q, q);
    for (int r = 0; r < f.rows(); ++r)
      for (int c = 0; c < f.cols(); ++c) f.at(r, c) = complex();
    return f;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_diff(const bergman::Poly<Cd>& a, const bergman::Poly<Cd>& b) { return bergman::max_abs<Cd>(a - b); }
inline double max_diff(const FormOp<Cd>& a, const FormOp<Cd>& b) { return bergman::max_abs(a - b); }
inline double max_diff(const FormOpJet<Cd>& a, const FormOpJet<Cd>& b) { return bergman::max_abs(a - b); }

// The operator multiplying monomial m in an operator-valued jet.
inline FormOp<Cd> coefficient_of(const FormOpJet<Cd>& b, const Mono& m) {
  FormOp<Cd> out(b.n(), b.q_in(), b.q_out());
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) out.at(r, c) = b.at(r, c).coeff(m);
  return out;
}

inline FormOp<Cd> wedge(int j, int n, int q_src) { return bergman::generator<Cd>(bergman::GenKind::Wedge, j, n, q_src); }
inline FormOp<Cd> contract(int j, int n, int q_dst) {
  return bergman::generator<Cd>(bergman::GenKind::Contract, j, n, q_dst);
}

// Every signature split for n <= 3, cycled through seeds.
struct Population {
  int n;
  int q;
  std::uint64_t seed;
};
inline std::vector<Population> randomized_population(int count, std::uint64_t base_seed = 1) {
  std::vector<Population> out;
  std::vector<std::pair<int, int>> shapes;
  for (int n = 1; n <= 3; ++n)
    for (int q = 0; q <= n; ++q) shapes.emplace_back(n, q);
  for (int i = 0; i < count; ++i) {
    const auto [n, q] = shapes[i % shapes.size()];
    out.push_back({n, q, base_seed + 7919u * static_cast<std::uint64_t>(i)});
  }
  return out;
}

inline bergman::WeightJet<Cd> random_weight(const Population& p, double scale = 0.5) {
  bergman::RandomWeightOptions opt;
  opt.n = p.n;
  opt.q = p.q;
  opt.scale = scale;
  return bergman::random_normal_weight(opt, p.seed);
}

// Value of a jet at (z, w).
inline Cd evaluate(const PolyJet<Cd>& p, const std::vector<Cd>& z, const std::vector<Cd>& w) {
  const int n = p.n();
  std::vector<Cd> x(4 * n);
  for (int j = 0; j < n; ++j) {
    x[bergman::block_var(n, Block::ZBar, j)] = std::conj(z[j]);
    x[bergman::block_var(n, Block::Z, j)] = z[j];
    x[bergman::block_var(n, Block::WBar, j)] = std::conj(w[j]);
    x[bergman::block_var(n, Block::W, j)] = w[j];
  }
  Cd total = 0.0;
  p.for_each([&](const Mono& m, const Cd& c) {
    Cd t = c;
    for (int v = 0; v < 4 * n; ++v)
      for (int e = 0; e < m.exp(v); ++e) t *= x[v];
    total += t;
  });
  return total;
}

// Relative gap between the stationary phase sum (j <= 2) and 2d quadrature of
// the integral of x^a y^b exp(i k f) dm for a quadratic z-jet f with n = 1.
inline double stationary_phase_gap(const PolyJet<Cd>& f, int a, int b, double k) {
  const Cd i(0.0, 1.0);
  auto phase = bergman::make_real_phase(f);
  const bergman::Poly<Cd> fx = bergman::to_real_coordinates(f);
  bergman::Poly<Cd> u(2, 4);
  Mono m;
  m.set(0, a);
  m.set(1, b);
  u.add(m, 1.0);
  auto eval = [](const bergman::Poly<Cd>& p, double x, double y) {
    Cd total = 0.0;
    p.for_each([&](const Mono& e, const Cd& c) { total += c * std::pow(x, e.exp(0)) * std::pow(y, e.exp(1)); });
    return total;
  };
  auto integrand = [&](double x, double y) { return 2.0 * eval(u, x, y) * std::exp(i * k * eval(fx, x, y)); };
  auto size = [&](double x, double y) {
    return 2.0 * std::abs(eval(u, x, y)) * std::exp(-k * eval(fx, x, y).imag());
  };
  // odd moments vanish, so converge on integrand + |integrand| and subtract
  const double scale = bergman::adaptive_gauss_legendre_2d(size, 1.6, 1e-13).value;
  auto shifted = [&](double x, double y) { return integrand(x, y) + size(x, y); };
  const Cd quad = bergman::adaptive_gauss_legendre_2d(shifted, 1.6, 1e-13).value - scale;
  const Cd sp = bergman::stationary_phase_sum(phase, u, 4, k, 2);
  return std::abs(sp - quad) / std::max(std::abs(quad), scale);
}

// i a |z|^2 + b z^2 + c zbar^2
inline PolyJet<Cd> gaussian_phase(Cd a, Cd b, Cd c) {
  PolyJet<Cd> f(1, 4);
  f.add(mono(1, {1}, {1}), Cd(0.0, 1.0) * a);
  f.add(mono(1, {}, {2}), b);
  f.add(mono(1, {2}, {}), c);
  return f;
}

inline std::vector<PolyJet<Cd>> gaussian_phase_family() {
  const Cd i(0.0, 1.0);
  return {gaussian_phase(1.0, 0.0, 0.0), gaussian_phase(1.5, 0.3 * i, 0.3 * i), gaussian_phase(1.0, 0.25, 0.25),
          gaussian_phase(0.8, 0.1 + 0.1 * i, 0.1 + 0.1 * i)};
}

}  // namespace testing
