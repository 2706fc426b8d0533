// Composite Gauss-Legendre rules with panel doubling.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "bergman/weight.hpp"

namespace bergman {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// m-point rule; nodes by Newton iteration on the Legendre recurrence.
GaussRule gauss_legendre(int m);

template <class T>
struct QuadratureResult {
  T value{};
  double achieved = 0.0;  // |last - previous| / max(|last|, tiny)
  int panels = 0;
};

template <class F>
auto composite_gauss_legendre(const F& f, double a, double b, int panels, const GaussRule& rule) {
  using T = decltype(f(a));
  T total{};
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width, half = 0.5 * width;
    T part{};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) part += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * part;
  }
  return total;
}

// Doubles the panel count until two successive values agree to `rel_tol`.
// Throws NumericalError reporting the achieved tolerance otherwise.
template <class F>
auto adaptive_gauss_legendre(const F& f, double a, double b, double rel_tol = 1e-12, int order = 20,
                             int max_panels = 1 << 12) {
  using T = decltype(f(a));
  const GaussRule rule = gauss_legendre(order);
  QuadratureResult<T> out;
  int panels = 1;
  T previous = composite_gauss_legendre(f, a, b, panels, rule);
  while (panels < max_panels) {
    panels *= 2;
    const T current = composite_gauss_legendre(f, a, b, panels, rule);
    const double scale = std::max(std::abs(current), 1e-300);
    out.value = current;
    out.panels = panels;
    out.achieved = std::abs(current - previous) / scale;
    if (out.achieved <= rel_tol) return out;
    previous = current;
  }
  std::ostringstream os;
  os << "quadrature did not converge: achieved relative tolerance " << out.achieved << " with " << panels
     << " panels, requested " << rel_tol;
  throw NumericalError(os.str());
}

// Tensor-product rule on the square [-half_width, half_width]^2, panels doubled
// in both directions.
template <class F>
auto adaptive_gauss_legendre_2d(const F& f, double half_width, double rel_tol = 1e-12, int order = 16,
                                int max_panels = 64) {
  auto inner = [&](int panels, const GaussRule& rule) {
    return composite_gauss_legendre(
        [&](double x) {
          return composite_gauss_legendre([&](double y) { return f(x, y); }, -half_width, half_width, panels, rule);
        },
        -half_width, half_width, panels, rule);
  };
  using T = decltype(f(0.0, 0.0));
  const GaussRule rule = gauss_legendre(order);
  QuadratureResult<T> out;
  int panels = 2;
  T previous = inner(panels, rule);
  while (panels < max_panels) {
    panels *= 2;
    const T current = inner(panels, rule);
    out.value = current;
    out.panels = panels;
    out.achieved = std::abs(current - previous) / std::max(std::abs(current), 1e-300);
    if (out.achieved <= rel_tol) return out;
    previous = current;
  }
  std::ostringstream os;
  os << "2d quadrature did not converge: achieved relative tolerance " << out.achieved;
  throw NumericalError(os.str());
}

}  // namespace bergman
