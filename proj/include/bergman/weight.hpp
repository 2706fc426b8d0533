// Polynomial weights and their reduction to normal form at a point.
#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "bergman/jets.hpp"

namespace bergman {

// Input errors (malformed specification, non-real weight, degenerate Hessian).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A floating point computation could not reach its target accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One monomial coefficient of zbar^alpha z^beta.
struct WeightTerm {
  std::vector<int> alpha;
  std::vector<int> beta;
  double re = 0.0;
  double im = 0.0;
};

struct WeightSpec {
  int n = 0;
  std::vector<double> point;  // 2n reals, z_j = point[2j] + i point[2j+1]
  std::vector<WeightTerm> terms;
};

// Checks shapes and Hermitian symmetry; throws ValidationError naming the
// offending (alpha, beta) pair.
void validate_spec(const WeightSpec& spec);

template <class S>
struct WeightJet {
  using Real = RealOf<S>;

  int n = 0;
  int q = 0;                 // number of negative eigenvalues
  std::vector<Real> lambda;  // negatives ascending, then positives ascending
  PolyJet<S> phi;            // normal-form weight, z-blocks only, degree <= 4
  PolyJet<S> removed;        // subtracted pluriharmonic part 2 Re h, deg h <= 2
  std::vector<Cd> frame;     // n x n column-major unitary z = U zeta (numeric)
  std::vector<double> point;

  int n_minus() const { return q; }
  int n_plus() const { return n - q; }
  Real abs_lambda(int j) const { return lambda[j] < 0 ? Real(-lambda[j]) : lambda[j]; }
  bool negative(int j) const { return j < q; }
  // |lambda_1 ... lambda_n|
  Real abs_det() const;

  // d^{|a|+|b|} phi / dzbar^a dz^b at 0; indices are zero-based and may repeat.
  S d(std::initializer_list<int> bars, std::initializer_list<int> unbars) const;
  S derivative(const std::vector<int>& alpha, const std::vector<int>& beta) const;
};

// Reduce a polynomial weight to normal form at spec.point.
WeightJet<Cd> normalize_weight(const WeightSpec& spec, double tol_sig = 1e-9);

// Exact variant: the weight's mixed Hessian at the point must already be
// diagonal (no unitary rotation is attempted); coefficients are read as the
// shortest decimal that round-trips each double.
WeightJet<QComplex> normalize_weight_exact(const WeightSpec& spec);

// Build a WeightJet from normal-form data directly.  The cubic and quartic
// coefficient table must be Hermitian; the quadratic part is sum lambda_j |z_j|^2.
template <class S>
WeightJet<S> weight_from_normal_form(const std::vector<RealOf<S>>& lambda, const PolyJet<S>& higher);

// Random normal-form weight with the given eigenvalue signs.  Eigenvalue
// magnitudes are drawn from [0.5, 2.5]; cubic and quartic coefficients have
// magnitude up to `scale`.  Degenerate |lambda| pairs can be requested.
struct RandomWeightOptions {
  int n = 2;
  int q = 1;
  double scale = 0.5;
  bool cubic = true;
  bool quartic = true;
  bool pure_holomorphic = true;  // include z^3, z^4-type terms
  int degenerate_pairs = 0;      // force |lambda_j| = |lambda_{j+1}| for this many pairs in a block
};
WeightJet<Cd> random_normal_weight(const RandomWeightOptions& opt, std::uint64_t seed);

// Express a WeightJet in the coordinates zeta = V^* z for a unitary V; the
// result is generally not diagonal unless V preserves the eigenspaces.
WeightJet<Cd> rotate_weight(const WeightJet<Cd>& w, const std::vector<Cd>& unitary);

// Spec for an arbitrary polynomial weight (used by the CLI and oracles).
WeightSpec spec_from_jet(const WeightJet<Cd>& w);

}  // namespace bergman
