#pragma once

#include <array>
#include <cmath>

#include "polequil/errors.hpp"
#include "polequil/functions.hpp"
#include "polequil/linalg.hpp"
#include "polequil/quadrature.hpp"

namespace polequil {

enum class Side { Left, Right };

struct StrategyPair {
  double left = 0.0;
  double right = 0.0;
  double mid() const { return 0.5 * (left + right); }
};

// One-dimensional two-party scenario on the strategy space [-1, 1].
// Voters at x turn out with probability F_c(m(x)), so the contested mass has
// density g(x) F_c(m(x)); each party's vote share is the slice of that mass
// on its side of the strategy midpoint.
struct Scenario1D {
  Pdf1D g;
  CostCdf fc;
  Motivation m;
  DeviationCost d_left;
  DeviationCost d_right;
  int quad_order = 64;
  double tolerance = 1e-10;

  void validate() const {
    if (!g.is_normalized()) throw ValidationError("scenario pdf not normalized");
    if (d_left.k < 0.0 || d_right.k < 0.0)
      throw ValidationError("deviation coefficient must be >= 0");
    if (d_left.ideal < kSupportLo - 1e-12 || d_left.ideal > kSupportHi + 1e-12 ||
        d_right.ideal < kSupportLo - 1e-12 || d_right.ideal > kSupportHi + 1e-12)
      throw ValidationError("ideal points must lie in [-1, 1]");
    if (d_left.ideal > d_right.ideal)
      throw ValidationError("ideal_left must not exceed ideal_right");
    if (!m.convex_on_support())
      throw ValidationError("motivation must be convex on [-1, 1]");
    if (quad_order < 2) throw ValidationError("quadrature order must be >= 2");
    if (tolerance <= 0.0) throw ValidationError("tolerance must be positive");
  }

  double turnout(double x) const { return g.value(x) * fc.value(m.value(x)); }

  double turnout_deriv(double x) const {
    const double mv = m.value(x);
    return g.deriv(x) * fc.value(mv) + g.value(x) * fc.deriv(mv) * m.deriv(x);
  }
};

inline double turnout_density(const Scenario1D& s, double x) {
  if (x < kSupportLo - 1e-12 || x > kSupportHi + 1e-12)
    throw OutOfSupport("turnout_density outside [-1, 1]");
  return s.turnout(x);
}

// Quadrature of the turnout density with panels laid out inside the moving
// bounds, so the boundary never straddles a panel.
inline double turnout_integral(const Scenario1D& s, double a, double b) {
  return integrate_checked([&s](double x) { return s.turnout(x); }, a, b,
                           s.quad_order, s.tolerance);
}

inline double utility_left(const Scenario1D& s, const StrategyPair& p) {
  return turnout_integral(s, kSupportLo, p.mid()) - s.d_left.value(p.left);
}

inline double utility_right(const Scenario1D& s, const StrategyPair& p) {
  return turnout_integral(s, p.mid(), kSupportHi) - s.d_right.value(p.right);
}

inline double total_turnout(const Scenario1D& s) {
  return turnout_integral(s, kSupportLo, kSupportHi);
}

struct Foc {
  double left;   // dU_left / dx_left
  double right;  // dU_right / dx_right
};

// Analytic first-order conditions: the share integral differentiates to half
// the turnout density at the midpoint.
inline Foc foc(const Scenario1D& s, const StrategyPair& p) {
  const double half_t = 0.5 * s.turnout(p.mid());
  return {half_t - s.d_left.d1(p.left), -half_t - s.d_right.d1(p.right)};
}

// L(x_left, x_right) = d/dx_right of [ (1/2) g(mid) F_c(m(mid)) ]; also equals
// -d^2 U_right / dx_right dx_left. Antisymmetry of the two cross terms is
// exact by construction.
inline double cross_derivative(const Scenario1D& s, const StrategyPair& p) {
  return 0.25 * s.turnout_deriv(p.mid());
}

// Jacobian of (foc.left, foc.right) with respect to (x_left, x_right); this is
// the equilibrium matrix H of the perturbation systems.
inline Mat2 foc_jacobian(const Scenario1D& s, const StrategyPair& p) {
  const double L = cross_derivative(s, p);
  return {L - s.d_left.d2(), L, -L, -L - s.d_right.d2()};
}

}  // namespace polequil
