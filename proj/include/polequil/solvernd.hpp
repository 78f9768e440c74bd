#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "polequil/errors.hpp"
#include "polequil/linalg.hpp"
#include "polequil/modelnd.hpp"
#include "polequil/solver1d.hpp"

namespace polequil {

struct EquilibriumResultND {
  StrategyPairND pair;
  std::vector<double> residual;  // stacked gradient at the solution
  double residual_norm = 0.0;
  MatN h_left, h_right, c_left_right, c_right_left;  // n x n blocks
  std::vector<BoundaryFlag> left_flags, right_flags;
  int iterations = 0;
  int worst_slice_maxima = 0;
  bool interior() const {
    for (auto f : left_flags)
      if (f != BoundaryFlag::Interior) return false;
    for (auto f : right_flags)
      if (f != BoundaryFlag::Interior) return false;
    return true;
  }
};

struct SolveOptionsND {
  bool multi_start = true;
  std::optional<StrategyPairND> seed;
  int max_outer = 200;
  double damping = 0.5;
};

namespace nddetail {

// 2n x 2n Jacobian of the stacked gradient system by central differences of
// the analytic gradients; the gradients themselves are exact, so this
// second-level differencing is well conditioned.
inline MatN stacked_jacobian(const ScenarioND& s, const StrategyPairND& p,
                             double step = 1e-5) {
  const std::size_t n = s.dim;
  MatN j(2 * n, 2 * n);
  for (std::size_t col = 0; col < 2 * n; ++col) {
    StrategyPairND up = p, dn = p;
    auto& uc = (col < n) ? up.left[col] : up.right[col - n];
    auto& dc = (col < n) ? dn.left[col] : dn.right[col - n];
    uc += step;
    dc -= step;
    const auto fu = foc_nd(s, up);
    const auto fd = foc_nd(s, dn);
    for (std::size_t row = 0; row < 2 * n; ++row)
      j(row, col) = (fu[row] - fd[row]) / (2.0 * step);
  }
  return j;
}

inline void clamp_cube(std::vector<double>& x) {
  for (auto& v : x) v = std::clamp(v, -1.0, 1.0);
}

// one party's projected gradient-ascent pass with backtracking line search
inline void ascend_party(const ScenarioND& s, Side side, StrategyPairND& p,
                         int max_steps = 40) {
  auto& own = (side == Side::Left) ? p.left : p.right;
  for (int step = 0; step < max_steps; ++step) {
    const auto g = utility_grad_own(s, side, p);
    double gnorm = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const bool blocked = (own[i] <= -1.0 && g[i] < 0.0) ||
                           (own[i] >= 1.0 && g[i] > 0.0);
      if (!blocked) gnorm = std::max(gnorm, std::abs(g[i]));
    }
    if (gnorm < 1e-4) return;
    const double base = utility_nd(s, side, p);
    double alpha = 0.5;
    const auto backup = own;
    for (int bt = 0; bt < 25; ++bt) {
      for (std::size_t i = 0; i < own.size(); ++i) own[i] = backup[i] + alpha * g[i];
      clamp_cube(own);
      if (utility_nd(s, side, p) > base + 1e-12) break;
      alpha *= 0.5;
      own = backup;
    }
    if (own == backup) return;  // no ascent direction survives the search
  }
}

struct RawSolutionND {
  StrategyPairND pair;
  int iterations = 0;
};

inline RawSolutionND solve_raw_nd(const ScenarioND& s, StrategyPairND start,
                                  const SolveOptionsND& opt) {
  StrategyPairND p = std::move(start);
  clamp_cube(p.left);
  clamp_cube(p.right);
  int outer = 0;
  for (; outer < opt.max_outer; ++outer) {
    StrategyPairND trial = p;
    ascend_party(s, Side::Left, trial);
    ascend_party(s, Side::Right, trial);
    double step = 0.0;
    for (std::size_t i = 0; i < s.dim; ++i) {
      const double nl = p.left[i] + opt.damping * (trial.left[i] - p.left[i]);
      const double nr = p.right[i] + opt.damping * (trial.right[i] - p.right[i]);
      step = std::max({step, std::abs(nl - p.left[i]), std::abs(nr - p.right[i])});
      p.left[i] = nl;
      p.right[i] = nr;
    }
    if (step < 1e-5) break;
  }
  if (outer >= opt.max_outer)
    throw NoConvergence("alternating ascent exceeded the outer-round budget");

  // Newton root-find on the stacked gradient system
  for (int it = 0; it < 60; ++it) {
    const auto f = foc_nd(s, p);
    if (norm_inf(f) < 1e-11) break;
    const MatN j = stacked_jacobian(s, p);
    std::vector<double> rhs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
    std::vector<double> delta;
    try {
      delta = lu_solve(j, rhs).solution;
    } catch (const SingularBlock&) {
      break;  // boundary or degenerate point: keep the ascent solution
    }
    double scale = 1.0;
    const double dn = norm_inf(delta);
    if (dn > 0.2) scale = 0.2 / dn;  // trust region in strategy units
    for (std::size_t i = 0; i < s.dim; ++i) {
      p.left[i] += scale * delta[i];
      p.right[i] += scale * delta[s.dim + i];
    }
    clamp_cube(p.left);
    clamp_cube(p.right);
    ++outer;
  }
  return {p, outer};
}

inline std::vector<BoundaryFlag> classify_nd(const std::vector<double>& x) {
  std::vector<BoundaryFlag> flags;
  for (double v : x) {
    if (v <= -1.0 + 1e-9)
      flags.push_back(BoundaryFlag::Lower);
    else if (v >= 1.0 - 1e-9)
      flags.push_back(BoundaryFlag::Upper);
    else
      flags.push_back(BoundaryFlag::Interior);
  }
  return flags;
}

// counts maxima of the own-utility slice along each coordinate via sign scans
// of the analytic gradient component
inline int certify_slices_nd(const ScenarioND& s, const StrategyPairND& eq,
                             int grid = 201) {
  int worst = 0;
  for (Side side : {Side::Left, Side::Right}) {
    for (std::size_t axis = 0; axis < s.dim; ++axis) {
      int count = 0;
      double prev = 0.0;
      for (int i = 0; i < grid; ++i) {
        StrategyPairND p = eq;
        auto& own = (side == Side::Left) ? p.left : p.right;
        own[axis] = -1.0 + 2.0 * i / (grid - 1);
        const double cur = utility_grad_own(s, side, p)[axis];
        if (i == 0) {
          if (cur < 0.0) ++count;
        } else if (prev > 0.0 && cur <= 0.0) {
          ++count;
        }
        prev = cur;
      }
      if (prev > 0.0) ++count;
      worst = std::max(worst, count);
    }
  }
  return worst;
}

}  // namespace nddetail

// Damped alternating gradient ascent with line search per party, polished by
// a Newton root-find on the stacked gradient system, then certified by
// per-coordinate slice scans and a second start.
inline EquilibriumResultND solve_nash_nd(const ScenarioND& s,
                                         const SolveOptionsND& opt = {}) {
  s.validate();
  StrategyPairND start;
  if (opt.seed) {
    start = *opt.seed;
  } else {
    start.left = s.d_left.ideal;
    start.right = s.d_right.ideal;
  }
  auto raw = nddetail::solve_raw_nd(s, start, opt);

  if (opt.multi_start) {
    StrategyPairND mid_start;
    mid_start.left.resize(s.dim);
    mid_start.right.resize(s.dim);
    for (std::size_t i = 0; i < s.dim; ++i) {
      const double c = 0.5 * (s.d_left.ideal[i] + s.d_right.ideal[i]);
      mid_start.left[i] = c;
      mid_start.right[i] = c;
    }
    const auto alt = nddetail::solve_raw_nd(s, mid_start, opt);
    double gap = 0.0;
    for (std::size_t i = 0; i < s.dim; ++i)
      gap = std::max({gap, std::abs(alt.pair.left[i] - raw.pair.left[i]),
                      std::abs(alt.pair.right[i] - raw.pair.right[i])});
    if (gap > 1e-5) throw NonUnique("multi-start solutions disagree in the cube");
  }

  EquilibriumResultND result;
  result.pair = raw.pair;
  result.iterations = raw.iterations;
  result.residual = foc_nd(s, result.pair);
  result.left_flags = nddetail::classify_nd(result.pair.left);
  result.right_flags = nddetail::classify_nd(result.pair.right);
  double rn = 0.0;
  for (std::size_t i = 0; i < 2 * s.dim; ++i) {
    const bool pinned =
        (i < s.dim ? result.left_flags[i] : result.right_flags[i - s.dim]) !=
        BoundaryFlag::Interior;
    if (!pinned) rn = std::max(rn, std::abs(result.residual[i]));
  }
  result.residual_norm = rn;

  const std::size_t n = s.dim;
  const MatN j = nddetail::stacked_jacobian(s, result.pair);
  result.h_left = MatN(n, n);
  result.h_right = MatN(n, n);
  result.c_left_right = MatN(n, n);
  result.c_right_left = MatN(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      result.h_left(i, k) = j(i, k);
      result.c_left_right(i, k) = j(i, n + k);
      result.c_right_left(i, k) = j(n + i, k);
      result.h_right(i, k) = j(n + i, n + k);
    }
  result.worst_slice_maxima = nddetail::certify_slices_nd(s, result.pair);
  return result;
}

struct SensitivityReportND {
  double alpha = 0.0;
  std::vector<double> dx_full;       // block solve of H dx = alpha b
  std::vector<double> dx_cross_free; // per-party blocks only
  std::vector<double> dx_diagonal;   // per-coordinate decoupling
  std::vector<double> elasticity;    // NaN where the coordinate is ~0
  std::vector<double> dx_oracle;
  bool has_oracle = false;
  double first_order_error = 0.0;
  double cross_block_norm = 0.0;
  double linear_residual = 0.0;
};

// First-order equilibrium response to scaling the feasibility cost to
// (1+alpha) Phi. Three nested simplifications are reported: the full block
// solve, the cross-block-free solve, and the fully diagonal formula.
inline SensitivityReportND perturb_feasibility(const ScenarioND& s,
                                               const EquilibriumResultND& r,
                                               double alpha,
                                               bool with_oracle = true) {
  if (!r.interior())
    throw BoundaryEquilibrium("feasibility sensitivity needs an interior equilibrium");
  const std::size_t n = s.dim;
  const auto phi_grad = s.phi.grad();
  std::vector<double> b(2 * n);
  for (std::size_t i = 0; i < n; ++i) b[i] = b[n + i] = phi_grad[i];

  MatN h(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      h(i, k) = r.h_left(i, k);
      h(i, n + k) = r.c_left_right(i, k);
      h(n + i, k) = r.c_right_left(i, k);
      h(n + i, n + k) = r.h_right(i, k);
    }

  SensitivityReportND rep;
  rep.alpha = alpha;
  std::vector<double> rhs(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) rhs[i] = alpha * b[i];
  rep.dx_full = lu_solve(h, rhs).solution;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    double acc = -rhs[i];
    for (std::size_t k = 0; k < 2 * n; ++k) acc += h(i, k) * rep.dx_full[k];
    rep.linear_residual = std::max(rep.linear_residual, std::abs(acc));
  }

  std::vector<double> rhs_l(n), rhs_r(n);
  for (std::size_t i = 0; i < n; ++i) rhs_l[i] = rhs_r[i] = alpha * phi_grad[i];
  const auto dl = lu_solve(r.h_left, rhs_l).solution;
  const auto dr = lu_solve(r.h_right, rhs_r).solution;
  rep.dx_cross_free = dl;
  rep.dx_cross_free.insert(rep.dx_cross_free.end(), dr.begin(), dr.end());

  rep.dx_diagonal.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(r.h_left(i, i)) < 1e-12 || std::abs(r.h_right(i, i)) < 1e-12)
      throw SingularBlock("diagonal Hessian entry is ~0");
    rep.dx_diagonal[i] = alpha * phi_grad[i] / r.h_left(i, i);
    rep.dx_diagonal[n + i] = alpha * phi_grad[i] / r.h_right(i, i);
  }

  rep.cross_block_norm =
      std::max(r.c_left_right.norm1(), r.c_right_left.norm1());

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  rep.elasticity.resize(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double xi = (i < n) ? r.pair.left[i] : r.pair.right[i - n];
    rep.elasticity[i] =
        (std::abs(xi) > 1e-6 && alpha != 0.0) ? rep.dx_full[i] / (alpha * xi) : nan;
  }

  if (with_oracle && alpha != 0.0) {
    ScenarioND perturbed = s;
    perturbed.phi.scale *= (1.0 + alpha);
    SolveOptionsND opt;
    opt.seed = r.pair;
    opt.multi_start = false;
    const auto moved = solve_nash_nd(perturbed, opt);
    rep.dx_oracle.resize(2 * n);
    rep.has_oracle = true;
    double err = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const double base = (i < n) ? r.pair.left[i] : r.pair.right[i - n];
      const double after = (i < n) ? moved.pair.left[i] : moved.pair.right[i - n];
      rep.dx_oracle[i] = after - base;
      err += (rep.dx_oracle[i] - rep.dx_full[i]) * (rep.dx_oracle[i] - rep.dx_full[i]);
    }
    rep.first_order_error = std::sqrt(err);
  }
  return rep;
}

struct EquilibriumPathND {
  std::vector<double> alphas;
  std::vector<EquilibriumResultND> points;
  std::vector<double> cond_left, cond_right;
  double step_bound = 0.2;
};

// Warm-started continuation over the feasibility scale: the scenario's Phi is
// scaled to alpha * Phi at each grid point.
inline EquilibriumPathND sweep_phi_scale(const ScenarioND& s,
                                         const std::vector<double>& alpha_grid,
                                         double step_bound = 0.2) {
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (alpha_grid[i] <= alpha_grid[i - 1])
      throw ValidationError("alpha grid must be strictly ascending");
  EquilibriumPathND path;
  path.alphas = alpha_grid;
  path.step_bound = step_bound;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    ScenarioND scaled = s;
    scaled.phi.scale = s.phi.scale * alpha_grid[i];
    SolveOptionsND opt;
    if (i > 0) {
      opt.seed = path.points.back().pair;
      opt.multi_start = false;
    }
    EquilibriumResultND eq;
    try {
      eq = solve_nash_nd(scaled, opt);
    } catch (const Error& e) {
      throw PathBreak(std::string("solve failed during phi sweep: ") + e.what(), i);
    }
    if (i > 0) {
      double jump = 0.0;
      const auto& prev = path.points.back().pair;
      for (std::size_t k = 0; k < s.dim; ++k)
        jump = std::max({jump, std::abs(eq.pair.left[k] - prev.left[k]),
                         std::abs(eq.pair.right[k] - prev.right[k])});
      if (jump > step_bound)
        throw PathBreak("equilibrium jumped by " + std::to_string(jump), i);
    }
    path.cond_left.push_back(cond1(eq.h_left));
    path.cond_right.push_back(cond1(eq.h_right));
    path.points.push_back(std::move(eq));
  }
  return path;
}

}  // namespace polequil
