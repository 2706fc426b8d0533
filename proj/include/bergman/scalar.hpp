// Scalar fields used by the expansion engine.
//
// Every algorithm is written once against a complex scalar type S.  Two
// instantiations exist: std::complex<double> for the numerical pipeline and
// QComplex (pairs of GMP rationals) for exact golden runs.
#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <gmpxx.h>

namespace bergman {

using Cd = std::complex<double>;

struct QComplex {
  mpq_class re;
  mpq_class im;

  QComplex() : re(0), im(0) {}
  QComplex(long v) : re(v), im(0) {}                        // NOLINT
  QComplex(const mpq_class& r) : re(r), im(0) {}            // NOLINT
  QComplex(const mpq_class& r, const mpq_class& i) : re(r), im(i) {}

  QComplex& operator+=(const QComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  QComplex& operator-=(const QComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  QComplex& operator*=(const QComplex& o) {
    mpq_class r = re * o.re - im * o.im;
    mpq_class i = re * o.im + im * o.re;
    re = r;
    im = i;
    return *this;
  }
  QComplex& operator/=(const QComplex& o) {
    mpq_class d = o.re * o.re + o.im * o.im;
    mpq_class r = (re * o.re + im * o.im) / d;
    mpq_class i = (im * o.re - re * o.im) / d;
    re = r;
    im = i;
    return *this;
  }
};

inline QComplex operator+(QComplex a, const QComplex& b) { return a += b; }
inline QComplex operator-(QComplex a, const QComplex& b) { return a -= b; }
inline QComplex operator*(QComplex a, const QComplex& b) { return a *= b; }
inline QComplex operator/(QComplex a, const QComplex& b) { return a /= b; }
inline QComplex operator-(const QComplex& a) { return QComplex(-a.re, -a.im); }
inline bool operator==(const QComplex& a, const QComplex& b) { return a.re == b.re && a.im == b.im; }

// Field traits.  Real is the matching real field (double or mpq_class).
template <class S>
struct Field;

template <>
struct Field<Cd> {
  using Real = double;
  static constexpr bool exact = false;
  static Cd make(double r, double i = 0.0) { return {r, i}; }
  static Cd unit() { return {0.0, 1.0}; }
  static Cd conj(const Cd& a) { return std::conj(a); }
  static double re(const Cd& a) { return a.real(); }
  static double im(const Cd& a) { return a.imag(); }
  static bool is_zero(const Cd& a) { return a.real() == 0.0 && a.imag() == 0.0; }
  static double magnitude(const Cd& a) { return std::abs(a); }
  static double to_double(double r) { return r; }
  static double abs(double r) { return std::fabs(r); }
  static double from_double(double r) { return r; }
  static std::string str(double r) { return std::to_string(r); }
};

template <>
struct Field<QComplex> {
  using Real = mpq_class;
  static constexpr bool exact = true;
  static QComplex make(const mpq_class& r, const mpq_class& i = 0) { return {r, i}; }
  static QComplex unit() { return {0, 1}; }
  static QComplex conj(const QComplex& a) { return {a.re, -a.im}; }
  static mpq_class re(const QComplex& a) { return a.re; }
  static mpq_class im(const QComplex& a) { return a.im; }
  static bool is_zero(const QComplex& a) { return sgn(a.re) == 0 && sgn(a.im) == 0; }
  static double magnitude(const QComplex& a) { return std::hypot(a.re.get_d(), a.im.get_d()); }
  static double to_double(const mpq_class& r) { return r.get_d(); }
  static mpq_class abs(const mpq_class& r) { return ::abs(r); }
  // Exact conversion of a binary double; decimal inputs should be parsed
  // through from_decimal instead.
  static mpq_class from_double(double r) { return mpq_class(r); }
  static std::string str(const mpq_class& r) { return r.get_str(); }
};

template <class S>
using RealOf = typename Field<S>::Real;

// Parse a decimal literal such as "-0.05" or "3/7" into an exact rational.
mpq_class rational_from_decimal(const std::string& text);

}  // namespace bergman
