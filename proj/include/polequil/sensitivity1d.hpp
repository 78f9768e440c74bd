#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "polequil/errors.hpp"
#include "polequil/model1d.hpp"
#include "polequil/solver1d.hpp"

namespace polequil {

enum class PerturbationKind { DeviationCost, Distribution };

struct SensitivityReport {
  PerturbationKind kind = PerturbationKind::DeviationCost;
  Side side = Side::Right;                      // perturbed side (deviation kind)
  double size = 0.0;                            // epsilon or gamma
  std::array<double, 2> dx_pred{0.0, 0.0};      // from the assembled H solve
  std::array<double, 2> elasticity{0.0, 0.0};   // per-unit relative response
  std::array<double, 2> dx_paper{0.0, 0.0};     // simplified closed forms, for comparison
  Mat2 hessian;
  bool has_oracle = false;
  std::array<double, 2> dx_oracle{0.0, 0.0};    // re-solve difference
  double first_order_error = 0.0;               // |dx_oracle - dx_pred|_2
  double linear_residual = 0.0;                 // |H dx_pred - b|_inf
};

// Equilibrium matrix of second partials. The solver already carries it; this
// recomputes analytically and refuses boundary equilibria, whose first-order
// theory does not apply.
inline Mat2 hessian_at(const Scenario1D& s, const EquilibriumResult& r) {
  if (!r.interior())
    throw BoundaryEquilibrium("sensitivity needs an interior equilibrium");
  return foc_jacobian(s, r.pair);
}

namespace detail {

inline std::array<double, 2> elasticities(const std::array<double, 2>& dx,
                                          double size, const StrategyPair& p) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (size == 0.0) return {0.0, 0.0};
  return {std::abs(p.left) > 1e-6 ? dx[0] / (size * p.left) : nan,
          std::abs(p.right) > 1e-6 ? dx[1] / (size * p.right) : nan};
}

inline void fill_linear_solution(SensitivityReport& rep, const Mat2& h,
                                 const std::array<double, 2>& b) {
  rep.hessian = h;
  if (std::abs(h.det()) < 1e-12)
    throw DegenerateDet("equilibrium Hessian determinant below 1e-12");
  rep.dx_pred = solve2(h, b);
  const double r0 = h.a * rep.dx_pred[0] + h.b * rep.dx_pred[1] - b[0];
  const double r1 = h.c * rep.dx_pred[0] + h.d * rep.dx_pred[1] - b[1];
  rep.linear_residual = std::max(std::abs(r0), std::abs(r1));
}

inline void fill_oracle(SensitivityReport& rep, const Scenario1D& perturbed,
                        const EquilibriumResult& base) {
  SolveOptions opt;
  opt.seed = base.pair;
  opt.multi_start = false;
  opt.run_certification = false;
  const EquilibriumResult moved = solve_nash(perturbed, opt);
  rep.dx_oracle = {moved.pair.left - base.pair.left,
                   moved.pair.right - base.pair.right};
  rep.has_oracle = true;
  const double e0 = rep.dx_oracle[0] - rep.dx_pred[0];
  const double e1 = rep.dx_oracle[1] - rep.dx_pred[1];
  rep.first_order_error = std::sqrt(e0 * e0 + e1 * e1);
}

}  // namespace detail

// First-order response to scaling one party's deviation cost to (1+eps) D.
// The right-hand side eps * dD/dx matches the scaled-cost reading of the
// perturbation; the simplified closed forms (which cancel the cross term
// against a truncated determinant) are reported alongside for comparison,
// never used for the prediction.
inline SensitivityReport perturb_deviation(const Scenario1D& s,
                                           const EquilibriumResult& r, double eps,
                                           Side side, bool with_oracle = true) {
  if (eps < 0.0) throw ValidationError("deviation perturbation needs eps >= 0");
  const Mat2 h = hessian_at(s, r);

  SensitivityReport rep;
  rep.kind = PerturbationKind::DeviationCost;
  rep.side = side;
  rep.size = eps;

  const double dl1 = s.d_left.d1(r.pair.left);
  const double dr1 = s.d_right.d1(r.pair.right);
  const std::array<double, 2> b = (side == Side::Right)
                                      ? std::array<double, 2>{0.0, eps * dr1}
                                      : std::array<double, 2>{eps * dl1, 0.0};
  detail::fill_linear_solution(rep, h, b);
  rep.elasticity = detail::elasticities(rep.dx_pred, eps, r.pair);

  // simplified forms built on det(H) ~ L (D_l'' - D_r'')
  const double L = cross_derivative(s, r.pair);
  const double curv_gap = s.d_left.d2() - s.d_right.d2();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (side == Side::Right) {
    rep.dx_paper[0] = (curv_gap != 0.0) ? -eps * dr1 / curv_gap : nan;
    rep.dx_paper[1] = (L != 0.0 && curv_gap != 0.0)
                          ? eps * dr1 * (L - s.d_left.d2()) / (L * curv_gap)
                          : nan;
  } else {
    rep.dx_paper[0] = (L != 0.0 && curv_gap != 0.0)
                          ? eps * dl1 * (-L - s.d_right.d2()) / (L * curv_gap)
                          : nan;
    rep.dx_paper[1] = (curv_gap != 0.0) ? eps * dl1 / curv_gap : nan;
  }

  // the perturbed party always moves toward its own ideal
  if (eps > 0.0) {
    const double own = (side == Side::Right) ? rep.dx_pred[1] : rep.dx_pred[0];
    const double toward = (side == Side::Right) ? s.d_right.ideal - r.pair.right
                                                : s.d_left.ideal - r.pair.left;
    if (own * toward < -1e-14)
      throw Error("deviation-cost sign law violated by the linear solve");
  }

  if (with_oracle && eps > 0.0) {
    Scenario1D perturbed = s;
    if (side == Side::Right)
      perturbed.d_right.k *= (1.0 + eps);
    else
      perturbed.d_left.k *= (1.0 + eps);
    detail::fill_oracle(rep, perturbed, r);
  }
  return rep;
}

// First-order response to tilting the voter density toward direction
// h = h_plus - h_minus (both normalized, so h has zero total mass). The
// response coefficient is half the turnout-weighted direction at the
// equilibrium midpoint; it drives both parties in opposite directions.
inline SensitivityReport perturb_distribution(const Scenario1D& s,
                                              const EquilibriumResult& r,
                                              double gamma, const Pdf1D& h_plus,
                                              const Pdf1D& h_minus,
                                              bool with_oracle = true) {
  if (!h_plus.is_normalized() || !h_minus.is_normalized())
    throw ValidationError("direction components must be normalized");
  const double mass = integrate(
      [&](double x) { return h_plus.value(x) - h_minus.value(x); }, kSupportLo,
      kSupportHi, 32, 1.0 / 64.0);
  if (std::abs(mass) > 1e-8)
    throw NotZeroMass("direction h must integrate to 0, got " + std::to_string(mass));
  const Mat2 h = hessian_at(s, r);

  SensitivityReport rep;
  rep.kind = PerturbationKind::Distribution;
  rep.size = gamma;

  const double mid = r.pair.mid();
  const double hx = h_plus.value(mid) - h_minus.value(mid);
  const double k_coef = 0.5 * hx * s.fc.value(s.m.value(mid));
  detail::fill_linear_solution(rep, h, {-gamma * k_coef, gamma * k_coef});
  rep.elasticity = detail::elasticities(rep.dx_pred, gamma, r.pair);

  if (rep.dx_pred[0] * rep.dx_pred[1] > 1e-12)
    throw Error("distribution perturbation must move the parties apart or not at all");

  if (with_oracle && gamma != 0.0) {
    Scenario1D perturbed = s;
    perturbed.g = Pdf1D::combination(
        {{1.0, s.g}, {gamma, h_plus}, {-gamma, h_minus}});
    detail::fill_oracle(rep, perturbed, r);
  }
  return rep;
}

struct EquilibriumPath {
  std::string param_name;
  std::vector<double> grid;
  std::vector<EquilibriumResult> points;
  double step_bound = 0.2;
};

// Warm-started natural-parameter continuation: the first grid point gets the
// full multi-start solve, later points are seeded with their predecessor.
// A failed solve or a jump beyond step_bound raises PathBreak with the index.
inline EquilibriumPath sweep_scenarios(
    const std::string& param_name, const std::vector<double>& grid,
    const std::function<Scenario1D(double)>& make_scenario, double step_bound = 0.2) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw ValidationError("sweep grid must be strictly ascending");
  EquilibriumPath path;
  path.param_name = param_name;
  path.grid = grid;
  path.step_bound = step_bound;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SolveOptions opt;
    if (i > 0) {
      opt.seed = path.points.back().pair;
      opt.multi_start = false;
    }
    EquilibriumResult eq;
    try {
      eq = solve_nash(make_scenario(grid[i]), opt);
    } catch (const Error& e) {
      throw PathBreak(std::string("solve failed during sweep: ") + e.what(), i);
    }
    if (i > 0) {
      const auto& prev = path.points.back().pair;
      const double jump = std::max(std::abs(eq.pair.left - prev.left),
                                   std::abs(eq.pair.right - prev.right));
      if (jump > step_bound)
        throw PathBreak("equilibrium jumped by " + std::to_string(jump), i);
    }
    path.points.push_back(std::move(eq));
  }
  return path;
}

struct MixtureContainmentReport {
  std::vector<double> lambdas;
  std::vector<StrategyPair> pairs;
  StrategyPair endpoint_g;  // lambda = 0
  StrategyPair endpoint_s;  // lambda = 1
  bool contained = true;
  double containment_margin = 0.0;  // smallest interior distance to an endpoint
  bool monotone_left = true;        // reported, not part of the containment claim
  bool monotone_right = true;
};

// Solves the game along the mixture (1-lambda) g + lambda s2 and checks that
// every interior equilibrium stays inside the endpoint intervals.
inline MixtureContainmentReport mixture_containment(
    const Scenario1D& base, const Pdf1D& g, const Pdf1D& s2,
    const std::vector<double>& lambda_grid) {
  auto scenario_with = [&](const Pdf1D& pdf) {
    Scenario1D s = base;
    s.g = pdf;
    return s;
  };
  MixtureContainmentReport rep;
  const EquilibriumResult eq_g = solve_nash(scenario_with(g));
  const EquilibriumResult eq_s = solve_nash(scenario_with(s2));
  rep.endpoint_g = eq_g.pair;
  rep.endpoint_s = eq_s.pair;
  if (eq_g.pair.left < eq_s.pair.left - 1e-9)
    throw EndpointOrderViolation(
        "expected x_left under g to be right of x_left under s2");

  rep.containment_margin = std::numeric_limits<double>::infinity();
  StrategyPair prev{};
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const double lam = lambda_grid[i];
    SolveOptions opt;
    if (i > 0) {
      opt.seed = rep.pairs.back();
      opt.multi_start = false;
    }
    const auto eq = solve_nash(scenario_with(mix_pdfs(g, s2, lam)), opt);
    rep.lambdas.push_back(lam);
    rep.pairs.push_back(eq.pair);
    if (lam > 0.0 && lam < 1.0) {
      const double lo_l = std::min(eq_g.pair.left, eq_s.pair.left);
      const double hi_l = std::max(eq_g.pair.left, eq_s.pair.left);
      const double lo_r = std::min(eq_g.pair.right, eq_s.pair.right);
      const double hi_r = std::max(eq_g.pair.right, eq_s.pair.right);
      if (eq.pair.left < lo_l - 1e-9 || eq.pair.left > hi_l + 1e-9 ||
          eq.pair.right < lo_r - 1e-9 || eq.pair.right > hi_r + 1e-9)
        rep.contained = false;
      rep.containment_margin = std::min(
          {rep.containment_margin, eq.pair.left - lo_l, hi_l - eq.pair.left,
           eq.pair.right - lo_r, hi_r - eq.pair.right});
    }
    if (i > 0) {
      if (eq.pair.left > prev.left + 1e-12) rep.monotone_left = false;
      if (eq.pair.right < prev.right - 1e-12) rep.monotone_right = false;
    }
    prev = eq.pair;
  }
  return rep;
}

}  // namespace polequil
