#include "bergman/forms.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <mutex>

namespace bergman {

FormBasis::FormBasis(int n, int q) : n_(n), q_(q) {
  if (n < 0 || n > 16 || q < 0 || q > n) throw StructuralError("form basis: bad (n, q)");
  for (unsigned m = 0; m < (1u << n); ++m)
    if (std::popcount(m) == q) masks_.push_back(m);
  // Lexicographic order of the increasing index sequences.
  std::sort(masks_.begin(), masks_.end(), [n](unsigned a, unsigned b) {
    for (int j = 0; j < n; ++j) {
      const bool ia = a >> j & 1u, ib = b >> j & 1u;
      if (ia != ib) return ia;
    }
    return false;
  });
  for (int k = 0; k < dim(); ++k) lookup_[masks_[k]] = k;
}

int FormBasis::index(unsigned mask) const {
  auto it = lookup_.find(mask);
  return it == lookup_.end() ? -1 : it->second;
}

std::vector<int> FormBasis::indices(int idx) const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (masks_[idx] >> j & 1u) out.push_back(j);
  return out;
}

std::string FormBasis::label(int idx) const {
  std::string s = "(";
  bool first = true;
  for (int j : indices(idx)) {
    if (!first) s += ",";
    s += std::to_string(j + 1);
    first = false;
  }
  return s + ")";
}

const FormBasis& form_basis(int n, int q) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<FormBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, q}];
  if (!slot) slot = std::make_unique<FormBasis>(n, q);
  return *slot;
}

// ---------------------------------------------------------------------------

template <class S>
FormOp<S>::FormOp(int n, int q_in, int q_out)
    : n_(n),
      q_in_(q_in),
      q_out_(q_out),
      rows_(form_basis(n, q_out).dim()),
      cols_(form_basis(n, q_in).dim()),
      data_(static_cast<std::size_t>(rows_) * cols_, S(0)) {}

template <class S>
FormOp<S> FormOp<S>::identity(int n, int q) {
  FormOp<S> id(n, q, q);
  for (int k = 0; k < id.rows(); ++k) id.at(k, k) = S(1);
  return id;
}

template <class S>
S FormOp<S>::basis_coeff(unsigned J, unsigned K) const {
  const int c = form_basis(n_, q_in_).index(J);
  const int r = form_basis(n_, q_out_).index(K);
  if (r < 0 || c < 0) throw StructuralError("FormOp: basis index outside degree");
  return at(r, c);
}

template <class S>
void FormOp<S>::set_basis_coeff(unsigned J, unsigned K, const S& v) {
  const int c = form_basis(n_, q_in_).index(J);
  const int r = form_basis(n_, q_out_).index(K);
  if (r < 0 || c < 0) throw StructuralError("FormOp: basis index outside degree");
  at(r, c) = v;
}

template <class S>
FormOp<S>& FormOp<S>::operator+=(const FormOp& o) {
  if (o.n_ != n_ || o.q_in_ != q_in_ || o.q_out_ != q_out_) throw StructuralError("FormOp: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

template <class S>
FormOp<S>& FormOp<S>::operator-=(const FormOp& o) {
  if (o.n_ != n_ || o.q_in_ != q_in_ || o.q_out_ != q_out_) throw StructuralError("FormOp: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

template <class S>
FormOp<S>& FormOp<S>::operator*=(const S& s) {
  for (auto& x : data_) x *= s;
  return *this;
}

template <class S>
FormOp<S> generator(GenKind kind, int j, int n, int q_src) {
  if (j < 0 || j >= n) throw StructuralError("generator: index out of range");
  const int q_from = kind == GenKind::Wedge ? q_src : q_src + 1;
  const int q_to = kind == GenKind::Wedge ? q_src + 1 : q_src;
  if (q_src < 0 || q_src + 1 > n) throw StructuralError("generator: degree out of range");
  FormOp<S> op(n, q_from, q_to);
  const FormBasis& src = form_basis(n, q_from);
  const FormBasis& dst = form_basis(n, q_to);
  const unsigned bit = 1u << j;
  for (int c = 0; c < src.dim(); ++c) {
    const unsigned J = src.mask(c);
    // Sign of moving dzbar_j past the factors with smaller index.
    const int before = std::popcount(J & (bit - 1u));
    const S sign = before % 2 ? S(-1) : S(1);
    if (kind == GenKind::Wedge) {
      if (J & bit) continue;
      op.at(dst.index(J | bit), c) = sign;
    } else {
      if (!(J & bit)) continue;
      op.at(dst.index(J & ~bit), c) = sign;
    }
  }
  return op;
}

template <class S>
FormOp<S> compose(const FormOp<S>& a, const FormOp<S>& b) {
  if (a.n() != b.n() || a.q_in() != b.q_out()) throw StructuralError("compose: degree mismatch");
  FormOp<S> out(a.n(), b.q_in(), a.q_out());
  for (int r = 0; r < a.rows(); ++r)
    for (int k = 0; k < a.cols(); ++k) {
      const S& x = a.at(r, k);
      if (Field<S>::is_zero(x)) continue;
      for (int c = 0; c < b.cols(); ++c) out.at(r, c) += x * b.at(k, c);
    }
  return out;
}

template <class S>
S form_trace(const FormOp<S>& t) {
  if (t.q_in() != t.q_out()) throw StructuralError("trace: not an endomorphism");
  S s(0);
  for (int k = 0; k < t.rows(); ++k) s += t.at(k, k);
  return s;
}

template <class S>
FormOp<S> form_adjoint(const FormOp<S>& t) {
  FormOp<S> out(t.n(), t.q_out(), t.q_in());
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c) out.at(c, r) = Field<S>::conj(t.at(r, c));
  return out;
}

template <class S>
S hat_component(const FormOp<S>& f) {
  if (f.q_in() != f.q_out()) throw StructuralError("hat_component: not an endomorphism");
  const unsigned I0 = first_block_mask(f.q_in());
  return f.basis_coeff(I0, I0);
}

template <class S>
double max_abs(const FormOp<S>& f) {
  double m = 0.0;
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c) m = std::max(m, Field<S>::magnitude(f.at(r, c)));
  return m;
}

// ---------------------------------------------------------------------------

template <class S>
FormOpJet<S>::FormOpJet(int n, int q_in, int q_out, int max_degree)
    : n_(n),
      q_in_(q_in),
      q_out_(q_out),
      rows_(form_basis(n, q_out).dim()),
      cols_(form_basis(n, q_in).dim()),
      maxdeg_(max_degree),
      data_(static_cast<std::size_t>(rows_) * cols_, PolyJet<S>(n, max_degree)) {}

template <class S>
FormOpJet<S> FormOpJet<S>::constant(const FormOp<S>& op, int max_degree) {
  FormOpJet<S> out(op.n(), op.q_in(), op.q_out(), max_degree);
  for (int r = 0; r < op.rows(); ++r)
    for (int c = 0; c < op.cols(); ++c) out.at(r, c).add(Mono{}, op.at(r, c));
  return out;
}

template <class S>
const PolyJet<S>& FormOpJet<S>::basis_entry(unsigned J, unsigned K) const {
  const int c = form_basis(n_, q_in_).index(J);
  const int r = form_basis(n_, q_out_).index(K);
  if (r < 0 || c < 0) throw StructuralError("FormOpJet: basis index outside degree");
  return at(r, c);
}

template <class S>
PolyJet<S>& FormOpJet<S>::basis_entry(unsigned J, unsigned K) {
  const int c = form_basis(n_, q_in_).index(J);
  const int r = form_basis(n_, q_out_).index(K);
  if (r < 0 || c < 0) throw StructuralError("FormOpJet: basis index outside degree");
  return at(r, c);
}

template <class S>
FormOpJet<S>& FormOpJet<S>::operator+=(const FormOpJet& o) {
  if (o.n_ != n_ || o.q_in_ != q_in_ || o.q_out_ != q_out_) throw StructuralError("FormOpJet: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

template <class S>
FormOpJet<S>& FormOpJet<S>::operator-=(const FormOpJet& o) {
  if (o.n_ != n_ || o.q_in_ != q_in_ || o.q_out_ != q_out_) throw StructuralError("FormOpJet: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

template <class S>
FormOpJet<S>& FormOpJet<S>::operator*=(const S& s) {
  for (auto& x : data_) x *= s;
  return *this;
}

template <class S>
FormOp<S> FormOpJet<S>::constant_term() const {
  FormOp<S> out(n_, q_in_, q_out_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.at(r, c) = at(r, c).coeff(Mono{});
  return out;
}

template <class S>
FormOpJet<S> compose(const FormOp<S>& a, const FormOpJet<S>& b) {
  if (a.n() != b.n() || a.q_in() != b.q_out()) throw StructuralError("compose: degree mismatch");
  FormOpJet<S> out(a.n(), b.q_in(), a.q_out(), b.max_degree());
  for (int r = 0; r < a.rows(); ++r)
    for (int k = 0; k < a.cols(); ++k) {
      const S& x = a.at(r, k);
      if (Field<S>::is_zero(x)) continue;
      for (int c = 0; c < b.cols(); ++c) {
        if (b.at(k, c).empty()) continue;
        out.at(r, c) += PolyJet<S>(a.n(), x * static_cast<const Poly<S>&>(b.at(k, c)));
      }
    }
  return out;
}

template <class S>
FormOpJet<S> compose(const FormOpJet<S>& a, const FormOp<S>& b) {
  if (a.n() != b.n() || a.q_in() != b.q_out()) throw StructuralError("compose: degree mismatch");
  FormOpJet<S> out(a.n(), b.q_in(), a.q_out(), a.max_degree());
  for (int r = 0; r < a.rows(); ++r)
    for (int k = 0; k < a.cols(); ++k) {
      if (a.at(r, k).empty()) continue;
      for (int c = 0; c < b.cols(); ++c) {
        const S& x = b.at(k, c);
        if (Field<S>::is_zero(x)) continue;
        out.at(r, c) += PolyJet<S>(a.n(), x * static_cast<const Poly<S>&>(a.at(r, k)));
      }
    }
  return out;
}

template <class S>
FormOpJet<S> compose(const FormOpJet<S>& a, const FormOpJet<S>& b, int cutoff) {
  if (a.n() != b.n() || a.q_in() != b.q_out()) throw StructuralError("compose: degree mismatch");
  const int cut = cutoff >= 0 ? cutoff : std::min(a.max_degree(), b.max_degree());
  FormOpJet<S> out(a.n(), b.q_in(), a.q_out(), cut);
  for (int r = 0; r < a.rows(); ++r)
    for (int k = 0; k < a.cols(); ++k) {
      if (a.at(r, k).empty()) continue;
      for (int c = 0; c < b.cols(); ++c) {
        if (b.at(k, c).empty()) continue;
        out.at(r, c) += PolyJet<S>(a.n(), multiply<S>(a.at(r, k), b.at(k, c), cut));
      }
    }
  return out;
}

template <class S>
FormOpJet<S> scale(const PolyJet<S>& f, const FormOpJet<S>& b, int cutoff) {
  const int cut = cutoff >= 0 ? cutoff : std::min(f.max_degree(), b.max_degree());
  FormOpJet<S> out(b.n(), b.q_in(), b.q_out(), cut);
  if (f.empty()) return out;
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c)
      if (!b.at(r, c).empty()) out.at(r, c) = PolyJet<S>(b.n(), multiply<S>(f, b.at(r, c), cut));
  return out;
}

template <class S>
FormOpJet<S> jet_diff(const FormOpJet<S>& b, Block blk, int j) {
  return b.map([&](const PolyJet<S>& p) { return jet_diff(p, blk, j); });
}

template <class S>
FormOpJet<S> homogeneous_part(const FormOpJet<S>& b, int d) {
  return b.map([&](const PolyJet<S>& p) { return PolyJet<S>(p.n(), homogeneous_part<S>(p, d)); });
}

template <class S>
FormOpJet<S> truncate(const FormOpJet<S>& b, int cutoff) {
  FormOpJet<S> out(b.n(), b.q_in(), b.q_out(), cutoff);
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) out.at(r, c) = PolyJet<S>(b.n(), truncate<S>(b.at(r, c), cutoff));
  return out;
}

template <class S>
PolyJet<S> form_trace(const FormOpJet<S>& t) {
  if (t.q_in() != t.q_out()) throw StructuralError("trace: not an endomorphism");
  PolyJet<S> s(t.n(), t.max_degree());
  for (int k = 0; k < t.rows(); ++k) s += t.at(k, k);
  return s;
}

template <class S>
double max_abs(const FormOpJet<S>& b) {
  double m = 0.0;
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) m = std::max(m, max_abs<S>(b.at(r, c)));
  return m;
}

template <class S>
FormOpJet<S> adjoint_swap(const FormOpJet<S>& b) {
  // -conj(a(w,z)) is what jet_swap_conjugate returns; undo its sign.
  FormOpJet<S> out(b.n(), b.q_out(), b.q_in(), b.max_degree());
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) {
      PolyJet<S> p = jet_swap_conjugate(b.at(r, c));
      p *= S(-1);
      out.at(c, r) = std::move(p);
    }
  return out;
}

#define BERGMAN_FORMS_INSTANTIATE(S)                                                     \
  template class FormOp<S>;                                                              \
  template class FormOpJet<S>;                                                           \
  template FormOp<S> generator<S>(GenKind, int, int, int);                               \
  template FormOp<S> compose<S>(const FormOp<S>&, const FormOp<S>&);                     \
  template S form_trace<S>(const FormOp<S>&);                                            \
  template FormOp<S> form_adjoint<S>(const FormOp<S>&);                                  \
  template S hat_component<S>(const FormOp<S>&);                                         \
  template double max_abs<S>(const FormOp<S>&);                                          \
  template FormOpJet<S> compose<S>(const FormOp<S>&, const FormOpJet<S>&);               \
  template FormOpJet<S> compose<S>(const FormOpJet<S>&, const FormOp<S>&);               \
  template FormOpJet<S> compose<S>(const FormOpJet<S>&, const FormOpJet<S>&, int);       \
  template FormOpJet<S> scale<S>(const PolyJet<S>&, const FormOpJet<S>&, int);           \
  template FormOpJet<S> jet_diff<S>(const FormOpJet<S>&, Block, int);                    \
  template FormOpJet<S> homogeneous_part<S>(const FormOpJet<S>&, int);                   \
  template FormOpJet<S> truncate<S>(const FormOpJet<S>&, int);                           \
  template PolyJet<S> form_trace<S>(const FormOpJet<S>&);                                \
  template double max_abs<S>(const FormOpJet<S>&);                                       \
  template FormOpJet<S> adjoint_swap<S>(const FormOpJet<S>&);

BERGMAN_FORMS_INSTANTIATE(Cd)
BERGMAN_FORMS_INSTANTIATE(QComplex)

}  // namespace bergman
