// Operators on (0,q)-forms at a point of C^n.
//
// Basis covectors dzbar^J are indexed by strictly increasing J, ordered
// lexicographically.  A FormOp is stored as a dense matrix whose rows index
// the output degree and columns the input degree.  The basis operator
// M_{J,K}, which sends dzbar^J to dzbar^K, is the matrix unit at (K, J).
#pragma once

#include <map>
#include <string>
#include <vector>

#include "bergman/jets.hpp"

namespace bergman {

// Strictly increasing index sets of a fixed size, as bit masks.
class FormBasis {
 public:
  FormBasis(int n, int q);
  int n() const { return n_; }
  int q() const { return q_; }
  int dim() const { return static_cast<int>(masks_.size()); }
  unsigned mask(int idx) const { return masks_[idx]; }
  int index(unsigned mask) const;  // -1 when absent
  std::vector<int> indices(int idx) const;
  std::string label(int idx) const;

 private:
  int n_;
  int q_;
  std::vector<unsigned> masks_;
  std::map<unsigned, int> lookup_;
};

const FormBasis& form_basis(int n, int q);

inline unsigned first_block_mask(int q) { return q == 0 ? 0u : ((1u << q) - 1u); }

template <class S>
class FormOp {
 public:
  FormOp() = default;
  FormOp(int n, int q_in, int q_out);
  static FormOp identity(int n, int q);

  int n() const { return n_; }
  int q_in() const { return q_in_; }
  int q_out() const { return q_out_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  S& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const S& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  // Coefficient of M_{J,K} with J, K given as masks.
  S basis_coeff(unsigned J, unsigned K) const;
  void set_basis_coeff(unsigned J, unsigned K, const S& v);

  FormOp& operator+=(const FormOp& o);
  FormOp& operator-=(const FormOp& o);
  FormOp& operator*=(const S& s);

 private:
  int n_ = 0, q_in_ = 0, q_out_ = 0, rows_ = 0, cols_ = 0;
  std::vector<S> data_;
};

template <class S>
FormOp<S> operator+(FormOp<S> a, const FormOp<S>& b) { return a += b; }
template <class S>
FormOp<S> operator-(FormOp<S> a, const FormOp<S>& b) { return a -= b; }
template <class S>
FormOp<S> operator*(const S& s, FormOp<S> a) { return a *= s; }

enum class GenKind { Wedge, Contract };

// dzbar_j^wedge (q_src -> q_src+1) or its adjoint (q_src+1 -> q_src);
// j is zero-based.
template <class S>
FormOp<S> generator(GenKind kind, int j, int n, int q_src);

template <class S>
FormOp<S> compose(const FormOp<S>& a, const FormOp<S>& b);  // a after b

template <class S>
S form_trace(const FormOp<S>& t);

template <class S>
FormOp<S> form_adjoint(const FormOp<S>& t);

// Coefficient of M_{I0,I0}, I0 = (1..q).
template <class S>
S hat_component(const FormOp<S>& f);

template <class S>
double max_abs(const FormOp<S>& f);

// Operator-valued jets: a FormOp with PolyJet entries.
template <class S>
class FormOpJet {
 public:
  FormOpJet() = default;
  FormOpJet(int n, int q_in, int q_out, int max_degree);
  static FormOpJet constant(const FormOp<S>& op, int max_degree);

  int n() const { return n_; }
  int q_in() const { return q_in_; }
  int q_out() const { return q_out_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int max_degree() const { return maxdeg_; }
  PolyJet<S>& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const PolyJet<S>& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const PolyJet<S>& basis_entry(unsigned J, unsigned K) const;
  PolyJet<S>& basis_entry(unsigned J, unsigned K);

  FormOpJet& operator+=(const FormOpJet& o);
  FormOpJet& operator-=(const FormOpJet& o);
  FormOpJet& operator*=(const S& s);

  // Entrywise map over the polynomial entries.
  template <class Fn>
  FormOpJet map(Fn&& fn) const {
    FormOpJet out(n_, q_in_, q_out_, maxdeg_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = fn(data_[k]);
    return out;
  }
  // Value at the origin.
  FormOp<S> constant_term() const;

 private:
  int n_ = 0, q_in_ = 0, q_out_ = 0, rows_ = 0, cols_ = 0, maxdeg_ = 0;
  std::vector<PolyJet<S>> data_;
};

template <class S>
FormOpJet<S> operator+(FormOpJet<S> a, const FormOpJet<S>& b) { return a += b; }
template <class S>
FormOpJet<S> operator-(FormOpJet<S> a, const FormOpJet<S>& b) { return a -= b; }

template <class S>
FormOpJet<S> compose(const FormOp<S>& a, const FormOpJet<S>& b);
template <class S>
FormOpJet<S> compose(const FormOpJet<S>& a, const FormOp<S>& b);
template <class S>
FormOpJet<S> compose(const FormOpJet<S>& a, const FormOpJet<S>& b, int cutoff = -1);
template <class S>
FormOpJet<S> scale(const PolyJet<S>& f, const FormOpJet<S>& b, int cutoff = -1);
template <class S>
FormOpJet<S> jet_diff(const FormOpJet<S>& b, Block blk, int j);
template <class S>
FormOpJet<S> homogeneous_part(const FormOpJet<S>& b, int d);
template <class S>
FormOpJet<S> truncate(const FormOpJet<S>& b, int cutoff);
template <class S>
PolyJet<S> form_trace(const FormOpJet<S>& t);
template <class S>
double max_abs(const FormOpJet<S>& b);

// (A_S b)(z, w) = b(w, z)^*: swap the points, conjugate, and transpose.
// Self-adjointness of the Bergman projection reads A_S b = b.
template <class S>
FormOpJet<S> adjoint_swap(const FormOpJet<S>& b);

}  // namespace bergman
