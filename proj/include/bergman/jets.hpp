// Truncated multivariate polynomials.
//
// Poly<S> is a sparse polynomial in up to 32 variables, truncated at a
// total-degree cutoff.  PolyJet<S> specialises the variable layout to four
// blocks of n variables in the order (zbar, z, wbar, w), which is how phases
// and amplitudes at a pair of points are stored.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bergman/scalar.hpp"

namespace bergman {

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Packed exponent vector: 4 bits per variable, 32 variables.
struct Mono {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  static constexpr int kMaxVars = 32;
  static constexpr int kMaxExp = 15;

  int exp(int v) const {
    const std::uint64_t word = v < 16 ? lo : hi;
    return static_cast<int>((word >> (4 * (v & 15))) & 0xFu);
  }
  void set(int v, int e) {
    std::uint64_t& word = v < 16 ? lo : hi;
    const int sh = 4 * (v & 15);
    word = (word & ~(std::uint64_t{0xF} << sh)) | (static_cast<std::uint64_t>(e) << sh);
  }
  int degree() const {
    int d = 0;
    for (std::uint64_t w : {lo, hi}) {
      while (w) {
        d += static_cast<int>(w & 0xFu);
        w >>= 4;
      }
    }
    return d;
  }
  // Exponent addition; callers guarantee no per-variable overflow (the
  // degree cutoff is below 16).
  Mono operator+(const Mono& o) const { return {lo + o.lo, hi + o.hi}; }
  bool operator==(const Mono& o) const { return lo == o.lo && hi == o.hi; }
  bool operator!=(const Mono& o) const { return !(*this == o); }
  bool operator<(const Mono& o) const { return hi != o.hi ? hi < o.hi : lo < o.lo; }
};

struct MonoHash {
  std::size_t operator()(const Mono& m) const noexcept {
    std::uint64_t h = m.lo * 0x9E3779B97F4A7C15ull;
    h ^= m.hi + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

template <class S>
class Poly {
 public:
  using Bucket = std::unordered_map<Mono, S, MonoHash>;

  Poly() : Poly(0, 0) {}
  Poly(int nvars, int max_degree) : nvars_(nvars), maxdeg_(max_degree), deg_(max_degree + 1) {
    if (nvars < 0 || nvars > Mono::kMaxVars) throw StructuralError("poly: too many variables");
    if (max_degree < 0 || max_degree >= Mono::kMaxExp) throw StructuralError("poly: degree cutoff out of range");
  }

  int nvars() const { return nvars_; }
  int max_degree() const { return maxdeg_; }

  // Accumulate c into the coefficient of m; terms above the cutoff are dropped.
  void add(const Mono& m, const S& c) {
    const int d = m.degree();
    if (d > maxdeg_ || Field<S>::is_zero(c)) return;
    auto [it, fresh] = deg_[d].try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (Field<S>::is_zero(it->second)) deg_[d].erase(it);
    }
  }
  void set(const Mono& m, const S& c) {
    const int d = m.degree();
    if (d > maxdeg_) return;
    if (Field<S>::is_zero(c))
      deg_[d].erase(m);
    else
      deg_[d][m] = c;
  }
  S coeff(const Mono& m) const {
    const int d = m.degree();
    if (d > maxdeg_) return S(0);
    auto it = deg_[d].find(m);
    return it == deg_[d].end() ? S(0) : it->second;
  }
  const Bucket& bucket(int d) const { return deg_.at(d); }
  bool empty() const {
    for (const auto& b : deg_)
      if (!b.empty()) return false;
    return true;
  }
  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& b : deg_) s += b.size();
    return s;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& b : deg_)
      for (const auto& [m, c] : b) fn(m, c);
  }

  // Sorted term list, used wherever output order matters.
  std::vector<std::pair<Mono, S>> sorted_terms() const {
    std::vector<std::pair<Mono, S>> out;
    for_each([&](const Mono& m, const S& c) { out.emplace_back(m, c); });
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      const int da = a.first.degree(), db = b.first.degree();
      return da != db ? da < db : a.first < b.first;
    });
    return out;
  }

  Poly& operator+=(const Poly& o) {
    check_same(o);
    o.for_each([&](const Mono& m, const S& c) { add(m, c); });
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_same(o);
    o.for_each([&](const Mono& m, const S& c) { add(m, -c); });
    return *this;
  }
  Poly& operator*=(const S& s) {
    if (Field<S>::is_zero(s)) {
      for (auto& b : deg_) b.clear();
      return *this;
    }
    for (auto& b : deg_)
      for (auto& kv : b) kv.second *= s;
    return *this;
  }

  void check_same(const Poly& o) const {
    if (o.nvars_ != nvars_) throw StructuralError("poly: variable count mismatch");
  }

 private:
  int nvars_;
  int maxdeg_;
  std::vector<Bucket> deg_;
};

template <class S>
Poly<S> operator+(Poly<S> a, const Poly<S>& b) {
  return a += b;
}
template <class S>
Poly<S> operator-(Poly<S> a, const Poly<S>& b) {
  return a -= b;
}
template <class S>
Poly<S> operator*(const S& s, Poly<S> a) {
  return a *= s;
}
template <class S>
Poly<S> operator-(Poly<S> a) {
  return a *= S(-1);
}

// Truncated product; the cutoff is the smaller of the two operands' cutoffs
// unless an explicit one is given.
template <class S>
Poly<S> multiply(const Poly<S>& a, const Poly<S>& b, int cutoff = -1) {
  a.check_same(b);
  const int cut = cutoff >= 0 ? cutoff : std::min(a.max_degree(), b.max_degree());
  Poly<S> out(a.nvars(), cut);
  for (int da = 0; da <= std::min(a.max_degree(), cut); ++da) {
    const auto& ba = a.bucket(da);
    if (ba.empty()) continue;
    for (int db = 0; db <= std::min(b.max_degree(), cut - da); ++db) {
      const auto& bb = b.bucket(db);
      if (bb.empty()) continue;
      for (const auto& [ma, ca] : ba)
        for (const auto& [mb, cb] : bb) out.add(ma + mb, ca * cb);
    }
  }
  return out;
}

template <class S>
Poly<S> operator*(const Poly<S>& a, const Poly<S>& b) {
  return multiply(a, b);
}

template <class S>
Poly<S> constant_poly(int nvars, int max_degree, const S& c) {
  Poly<S> p(nvars, max_degree);
  p.add(Mono{}, c);
  return p;
}

template <class S>
Poly<S> variable_poly(int nvars, int max_degree, int v, const S& c = S(1)) {
  Poly<S> p(nvars, max_degree);
  Mono m;
  m.set(v, 1);
  p.add(m, c);
  return p;
}

// Formal partial derivative with respect to variable v.
template <class S>
Poly<S> diff(const Poly<S>& a, int v) {
  if (v < 0 || v >= a.nvars()) throw StructuralError("diff: variable index out of range");
  Poly<S> out(a.nvars(), a.max_degree());
  a.for_each([&](const Mono& m, const S& c) {
    const int e = m.exp(v);
    if (e == 0) return;
    Mono r = m;
    r.set(v, e - 1);
    out.add(r, c * S(e));
  });
  return out;
}

template <class S>
Poly<S> homogeneous_part(const Poly<S>& a, int d) {
  Poly<S> out(a.nvars(), a.max_degree());
  if (d <= a.max_degree())
    for (const auto& [m, c] : a.bucket(d)) out.add(m, c);
  return out;
}

template <class S>
Poly<S> truncate(const Poly<S>& a, int cutoff) {
  Poly<S> out(a.nvars(), cutoff);
  a.for_each([&](const Mono& m, const S& c) { out.add(m, c); });
  return out;
}

template <class S>
Poly<S> conj_coefficients(const Poly<S>& a) {
  Poly<S> out(a.nvars(), a.max_degree());
  a.for_each([&](const Mono& m, const S& c) { out.add(m, Field<S>::conj(c)); });
  return out;
}

// Move exponents of variable v to variable target[v] in a polynomial with
// new_nvars variables; target[v] < 0 means the variable is set to zero.
template <class S>
Poly<S> remap_variables(const Poly<S>& a, const std::vector<int>& target, int new_nvars) {
  Poly<S> out(new_nvars, a.max_degree());
  a.for_each([&](const Mono& m, const S& c) {
    Mono r;
    for (int v = 0; v < a.nvars(); ++v) {
      const int e = m.exp(v);
      if (e == 0) continue;
      if (target[v] < 0) return;
      r.set(target[v], r.exp(target[v]) + e);
    }
    out.add(r, c);
  });
  return out;
}

// A linear form sum_k coeff_k * y_{var_k}.
template <class S>
using LinearForm = std::vector<std::pair<int, S>>;

// Substitute x_v = image[v](y) and expand.  The result has new_nvars
// variables and the same degree cutoff; degrees are preserved because the
// substitution is linear.
template <class S>
Poly<S> substitute_linear(const Poly<S>& a, const std::vector<LinearForm<S>>& image, int new_nvars) {
  Poly<S> out(new_nvars, a.max_degree());
  // Cache powers of each image to keep the expansion cheap.
  std::vector<std::vector<Poly<S>>> powers(a.nvars());
  auto power = [&](int v, int e) -> const Poly<S>& {
    auto& pv = powers[v];
    if (pv.empty()) {
      pv.emplace_back(constant_poly<S>(new_nvars, a.max_degree(), S(1)));
    }
    while (static_cast<int>(pv.size()) <= e) {
      Poly<S> lin(new_nvars, a.max_degree());
      for (const auto& [var, c] : image[v]) lin.add([&] { Mono m; m.set(var, 1); return m; }(), c);
      pv.push_back(multiply(pv.back(), lin));
    }
    return pv[e];
  };
  a.for_each([&](const Mono& m, const S& c) {
    Poly<S> term = constant_poly<S>(new_nvars, a.max_degree(), c);
    for (int v = 0; v < a.nvars(); ++v) {
      const int e = m.exp(v);
      if (e) term = multiply(term, power(v, e));
    }
    out += term;
  });
  return out;
}

template <class S>
double max_abs(const Poly<S>& a) {
  double m = 0.0;
  a.for_each([&](const Mono&, const S& c) { m = std::max(m, Field<S>::magnitude(c)); });
  return m;
}

template <class S>
double max_abs_up_to(const Poly<S>& a, int d) {
  double m = 0.0;
  for (int k = 0; k <= std::min(d, a.max_degree()); ++k)
    for (const auto& kv : a.bucket(k)) m = std::max(m, Field<S>::magnitude(kv.second));
  return m;
}

// ---------------------------------------------------------------------------
// Four-block jets in (zbar, z, wbar, w).

enum class Block : int { ZBar = 0, Z = 1, WBar = 2, W = 3 };

inline int block_var(int n, Block b, int j) { return static_cast<int>(b) * n + j; }

// Multi-index with a split point q: first q entries are the primed block.
struct MultiIndex {
  std::vector<int> e;

  int size() const { return static_cast<int>(e.size()); }
  int total() const {
    int s = 0;
    for (int x : e) s += x;
    return s;
  }
  MultiIndex primed(int q) const { return {std::vector<int>(e.begin(), e.begin() + q)}; }
  MultiIndex double_primed(int q) const { return {std::vector<int>(e.begin() + q, e.end())}; }
  static MultiIndex concat(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r = a;
    r.e.insert(r.e.end(), b.e.begin(), b.e.end());
    return r;
  }
  bool operator==(const MultiIndex& o) const { return e == o.e; }
};

enum class PairingMode { SignedPrimed, SignedDoublePrimed, AbsPrimed, AbsDoublePrimed };

template <class R>
R lambda_pairing(const std::vector<R>& lambda, const MultiIndex& alpha, int q, PairingMode mode) {
  if (static_cast<int>(lambda.size()) != alpha.size()) throw StructuralError("lambda_pairing: length mismatch");
  R s = 0;
  const bool primed = mode == PairingMode::SignedPrimed || mode == PairingMode::AbsPrimed;
  const bool absolute = mode == PairingMode::AbsPrimed || mode == PairingMode::AbsDoublePrimed;
  const int lo = primed ? 0 : q;
  const int hi = primed ? q : alpha.size();
  for (int j = lo; j < hi; ++j) {
    R l = lambda[j];
    if (absolute && l < 0) l = -l;
    s += l * alpha.e[j];
  }
  return s;
}

template <class S>
class PolyJet : public Poly<S> {
 public:
  PolyJet() = default;
  PolyJet(int n, int max_degree) : Poly<S>(4 * n, max_degree), n_(n) {}
  PolyJet(int n, Poly<S> p) : Poly<S>(std::move(p)), n_(n) {
    if (this->nvars() != 4 * n) throw StructuralError("PolyJet: expected 4n variables");
  }
  int n() const { return n_; }

  static Mono monomial(int n, const MultiIndex& a, const MultiIndex& b, const MultiIndex& c, const MultiIndex& d) {
    Mono m;
    const MultiIndex* blocks[4] = {&a, &b, &c, &d};
    for (int blk = 0; blk < 4; ++blk) {
      if (blocks[blk]->size() != n) throw StructuralError("PolyJet: multi-index length mismatch");
      for (int j = 0; j < n; ++j) m.set(blk * n + j, blocks[blk]->e[j]);
    }
    return m;
  }
  static std::array<MultiIndex, 4> split(int n, const Mono& m) {
    std::array<MultiIndex, 4> out;
    for (int blk = 0; blk < 4; ++blk) {
      out[blk].e.resize(n);
      for (int j = 0; j < n; ++j) out[blk].e[j] = m.exp(blk * n + j);
    }
    return out;
  }

 private:
  int n_ = 0;
};

template <class S>
PolyJet<S> jet_product(const PolyJet<S>& a, const PolyJet<S>& b) {
  if (a.n() != b.n() || a.max_degree() != b.max_degree()) throw StructuralError("jet_product: shape mismatch");
  return PolyJet<S>(a.n(), multiply<S>(a, b));
}

template <class S>
PolyJet<S> jet_diff(const PolyJet<S>& a, Block b, int j) {
  if (j < 0 || j >= a.n()) throw StructuralError("jet_diff: index out of range");
  return PolyJet<S>(a.n(), diff<S>(a, block_var(a.n(), b, j)));
}

// Returns the jet of -conj(a(w, z)).  Swapping (z, w) and conjugating the
// value maps the exponent quadruple (zbar, z, wbar, w) = (A, B, C, D) to
// (D, C, B, A).
template <class S>
PolyJet<S> jet_swap_conjugate(const PolyJet<S>& a) {
  const int n = a.n();
  PolyJet<S> out(n, a.max_degree());
  a.for_each([&](const Mono& m, const S& c) {
    Mono r;
    for (int j = 0; j < n; ++j) {
      r.set(block_var(n, Block::ZBar, j), m.exp(block_var(n, Block::W, j)));
      r.set(block_var(n, Block::Z, j), m.exp(block_var(n, Block::WBar, j)));
      r.set(block_var(n, Block::WBar, j), m.exp(block_var(n, Block::Z, j)));
      r.set(block_var(n, Block::W, j), m.exp(block_var(n, Block::ZBar, j)));
    }
    out.add(r, -Field<S>::conj(c));
  });
  return out;
}

// Restriction to the diagonal w = z, returned as a jet with empty w blocks.
template <class S>
PolyJet<S> restrict_diagonal(const PolyJet<S>& a) {
  const int n = a.n();
  std::vector<int> target(4 * n);
  for (int j = 0; j < n; ++j) {
    target[block_var(n, Block::ZBar, j)] = block_var(n, Block::ZBar, j);
    target[block_var(n, Block::Z, j)] = block_var(n, Block::Z, j);
    target[block_var(n, Block::WBar, j)] = block_var(n, Block::ZBar, j);
    target[block_var(n, Block::W, j)] = block_var(n, Block::Z, j);
  }
  return PolyJet<S>(n, remap_variables<S>(a, target, 4 * n));
}

// a(z, 0): drop every monomial that involves w or wbar.
template <class S>
PolyJet<S> restrict_w_zero(const PolyJet<S>& a) {
  const int n = a.n();
  std::vector<int> target(4 * n, -1);
  for (int v = 0; v < 2 * n; ++v) target[v] = v;
  return PolyJet<S>(n, remap_variables<S>(a, target, 4 * n));
}

// a(0, z) relabelled as a function of z: w-blocks moved onto the z-blocks.
template <class S>
PolyJet<S> restrict_z_zero_as_z(const PolyJet<S>& a) {
  const int n = a.n();
  std::vector<int> target(4 * n, -1);
  for (int j = 0; j < n; ++j) {
    target[block_var(n, Block::WBar, j)] = block_var(n, Block::ZBar, j);
    target[block_var(n, Block::W, j)] = block_var(n, Block::Z, j);
  }
  return PolyJet<S>(n, remap_variables<S>(a, target, 4 * n));
}

// f(z) -> f(w): move z-blocks onto the w-blocks.
template <class S>
PolyJet<S> relabel_z_as_w(const PolyJet<S>& a) {
  const int n = a.n();
  std::vector<int> target(4 * n, -1);
  for (int j = 0; j < n; ++j) {
    target[block_var(n, Block::ZBar, j)] = block_var(n, Block::WBar, j);
    target[block_var(n, Block::Z, j)] = block_var(n, Block::W, j);
  }
  return PolyJet<S>(n, remap_variables<S>(a, target, 4 * n));
}

// Calls fn(Mono) for every monomial of exact total degree `degree` in the
// listed variables.
template <class Fn>
void for_each_monomial(const std::vector<int>& vars, int degree, Fn&& fn) {
  Mono m;
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
    if (k + 1 == vars.size() || vars.empty()) {
      if (vars.empty()) {
        if (left == 0) fn(m);
        return;
      }
      m.set(vars[k], left);
      fn(m);
      m.set(vars[k], 0);
      return;
    }
    for (int e = left; e >= 0; --e) {
      m.set(vars[k], e);
      rec(k + 1, left - e);
    }
    m.set(vars[k], 0);
  };
  rec(0, degree);
}

// Variables of the z-blocks (zbar_1..zbar_n, z_1..z_n).
inline std::vector<int> z_block_vars(int n) {
  std::vector<int> v(2 * n);
  for (int k = 0; k < 2 * n; ++k) v[k] = k;
  return v;
}

inline std::vector<int> all_jet_vars(int n) {
  std::vector<int> v(4 * n);
  for (int k = 0; k < 4 * n; ++k) v[k] = k;
  return v;
}

// Readable rendering such as "(0.5,0)*zb1*z2^2".
inline std::string monomial_name(int n, const Mono& m) {
  static const char* names[4] = {"zb", "z", "wb", "w"};
  std::string s;
  for (int blk = 0; blk < 4; ++blk)
    for (int j = 0; j < n; ++j) {
      const int e = m.exp(blk * n + j);
      if (!e) continue;
      if (!s.empty()) s += "*";
      s += names[blk] + std::to_string(j + 1);
      if (e > 1) s += "^" + std::to_string(e);
    }
  return s.empty() ? "1" : s;
}

}  // namespace bergman
