#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "polequil/errors.hpp"
#include "polequil/model1d.hpp"

namespace polequil {

enum class BoundaryFlag { Interior, Lower, Upper };

struct QuasiConcavityReport {
  int opponent_grid = 41;
  int slice_grid = 2001;
  int worst_left = 0;   // max local-maximum count over sampled left slices
  int worst_right = 0;  // mirror for the right party
  bool multimodal = false;
  bool unique_certified() const {
    return !multimodal && worst_left == 1 && worst_right == 1;
  }
};

struct EquilibriumResult {
  StrategyPair pair;
  std::array<double, 2> foc_residual{0.0, 0.0};
  Mat2 hessian;
  BoundaryFlag left_flag = BoundaryFlag::Interior;
  BoundaryFlag right_flag = BoundaryFlag::Interior;
  int iterations = 0;
  QuasiConcavityReport diagnostics;
  bool interior() const {
    return left_flag == BoundaryFlag::Interior && right_flag == BoundaryFlag::Interior;
  }
};

struct SolveOptions {
  bool multi_start = true;
  bool run_certification = true;
  std::optional<StrategyPair> seed;  // overrides the ideal-point start
  int max_iterations = 500;
  double damping = 0.5;
};

namespace detail {

// Locates every candidate maximizer of the own-utility slice x -> U(x, fixed)
// on [lo, hi]: interior first-order-condition roots where the slice derivative
// flips + to -, plus boundary points where the derivative pushes outward.
template <class Deriv>
std::vector<double> slice_maximizer_candidates(Deriv&& foc_own, double lo, double hi,
                                               int scan = 512) {
  std::vector<double> out;
  if (hi - lo < 1e-15) return {lo};
  const double h = (hi - lo) / scan;
  double x0 = lo, f0 = foc_own(lo);
  if (f0 < 0.0) out.push_back(lo);
  for (int i = 1; i <= scan; ++i) {
    const double x1 = (i == scan) ? hi : lo + i * h;
    const double f1 = foc_own(x1);
    if (f0 > 0.0 && f1 <= 0.0) {
      // bracketed descent through zero: bisect to the argument tolerance
      double a = x0, b = x1, fa = f0;
      for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
        const double c = 0.5 * (a + b);
        const double fc = foc_own(c);
        if (fa > 0.0 && fc > 0.0) {
          a = c;
          fa = fc;
        } else {
          b = c;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 > 0.0) out.push_back(hi);
  if (out.empty()) out.push_back(hi);  // flat slice: take the rightmost point
  return out;
}

// Picks the utility-maximizing candidate; leftmost wins exact ties, but two
// distinct candidates within the 1e-9 tie tolerance are reported as Multimodal.
template <class Utility>
double pick_best_candidate(Utility&& utility, const std::vector<double>& candidates) {
  double best_x = candidates.front();
  double best_u = utility(best_x);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double u = utility(candidates[i]);
    if (u > best_u + 1e-9) {
      best_u = u;
      best_x = candidates[i];
    } else if (u > best_u - 1e-9 && std::abs(candidates[i] - best_x) > 1e-8) {
      throw Multimodal("two best-response candidates tie within 1e-9 utility");
    }
  }
  return best_x;
}

}  // namespace detail

// Best response of the left party to a fixed x_right. The search domain is the
// uncrossed interval [-1, x_right]; solvers never propose crossed pairs.
inline double best_response_left(const Scenario1D& s, double x_right) {
  const double hi = std::clamp(x_right, kSupportLo, kSupportHi);
  auto foc_own = [&](double x) {
    return 0.5 * s.turnout(0.5 * (x + x_right)) - s.d_left.d1(x);
  };
  auto candidates = detail::slice_maximizer_candidates(foc_own, kSupportLo, hi);
  if (candidates.size() == 1) return candidates.front();
  auto utility = [&](double x) { return utility_left(s, {x, x_right}); };
  return detail::pick_best_candidate(utility, candidates);
}

inline double best_response_right(const Scenario1D& s, double x_left) {
  const double lo = std::clamp(x_left, kSupportLo, kSupportHi);
  auto foc_own = [&](double x) {
    return -0.5 * s.turnout(0.5 * (x_left + x)) - s.d_right.d1(x);
  };
  auto candidates = detail::slice_maximizer_candidates(foc_own, lo, kSupportHi);
  if (candidates.size() == 1) return candidates.front();
  auto utility = [&](double x) { return utility_right(s, {x_left, x}); };
  return detail::pick_best_candidate(utility, candidates);
}

// Slope of the left best-response curve, dx_left / dx_right, by implicit
// differentiation of the left first-order condition.
inline double br_slope(const Scenario1D& s, const StrategyPair& p) {
  const double L = cross_derivative(s, p);
  const double own = L - s.d_left.d2();
  if (std::abs(own) < 1e-12)
    throw DegenerateHessian("own second derivative within 1e-12 of zero");
  return -L / own;
}

// Counts local maxima of each party's utility slices over a grid of opponent
// strategies. Interior maxima are + to - sign changes of the analytic slice
// derivative; boundary maxima are outward-pointing derivatives.
inline QuasiConcavityReport certify(const Scenario1D& s, const EquilibriumResult& r) {
  (void)r;
  QuasiConcavityReport rep;
  auto count_maxima = [&](Side side, double opponent) {
    int count = 0;
    const int n = rep.slice_grid;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = kSupportLo + (kSupportHi - kSupportLo) * i / (n - 1);
      const StrategyPair p = (side == Side::Left) ? StrategyPair{x, opponent}
                                                  : StrategyPair{opponent, x};
      const Foc f = foc(s, p);
      const double cur = (side == Side::Left) ? f.left : f.right;
      if (i == 0) {
        if (cur < 0.0) ++count;  // maximum pinned at the lower bound
      } else if (prev > 0.0 && cur <= 0.0) {
        ++count;
      }
      prev = cur;
    }
    if (prev > 0.0) ++count;  // maximum pinned at the upper bound
    return count;
  };
  for (int j = 0; j < rep.opponent_grid; ++j) {
    const double opp = kSupportLo + (kSupportHi - kSupportLo) * j / (rep.opponent_grid - 1);
    rep.worst_left = std::max(rep.worst_left, count_maxima(Side::Left, opp));
    rep.worst_right = std::max(rep.worst_right, count_maxima(Side::Right, opp));
  }
  rep.multimodal = rep.worst_left > 1 || rep.worst_right > 1;
  return rep;
}

namespace detail {

struct RawSolution {
  StrategyPair pair;
  BoundaryFlag left_flag = BoundaryFlag::Interior;
  BoundaryFlag right_flag = BoundaryFlag::Interior;
  int iterations = 0;
};

inline BoundaryFlag classify(double x) {
  if (x <= kSupportLo + 1e-12) return BoundaryFlag::Lower;
  if (x >= kSupportHi - 1e-12) return BoundaryFlag::Upper;
  return BoundaryFlag::Interior;
}

inline RawSolution solve_raw(const Scenario1D& s, StrategyPair start,
                             const SolveOptions& opt) {
  StrategyPair p = start;
  int it = 0;
  double step = 1.0;
  for (; it < opt.max_iterations; ++it) {
    const double bl = best_response_left(s, p.right);
    const double nl = p.left + opt.damping * (bl - p.left);
    const double br = best_response_right(s, nl);
    const double nr = p.right + opt.damping * (br - p.right);
    step = std::max(std::abs(nl - p.left), std::abs(nr - p.right));
    p = {nl, nr};
    if (step < 1e-4) break;
  }
  if (step >= 1e-4)
    throw NoConvergence("best-response iteration exceeded " +
                        std::to_string(opt.max_iterations) + " rounds");

  RawSolution out;
  out.pair = p;
  out.left_flag = classify(p.left);
  out.right_flag = classify(p.right);
  out.iterations = it;

  // Newton polish of the first-order conditions on the interior coordinates.
  const bool li = out.left_flag == BoundaryFlag::Interior;
  const bool ri = out.right_flag == BoundaryFlag::Interior;
  for (int k = 0; k < 60; ++k) {
    const Foc f = foc(s, out.pair);
    const double rl = li ? f.left : 0.0;
    const double rr = ri ? f.right : 0.0;
    if (std::abs(rl) < 1e-13 && std::abs(rr) < 1e-13) break;
    const Mat2 h = foc_jacobian(s, out.pair);
    double dl = 0.0, dr = 0.0;
    if (li && ri) {
      const auto d = solve2(h, {-rl, -rr});
      dl = d[0];
      dr = d[1];
    } else if (li) {
      dl = -rl / h.a;
    } else if (ri) {
      dr = -rr / h.d;
    } else {
      break;
    }
    out.pair.left = std::clamp(out.pair.left + dl, kSupportLo, kSupportHi);
    out.pair.right = std::clamp(out.pair.right + dr, kSupportLo, kSupportHi);
    ++out.iterations;
  }
  return out;
}

}  // namespace detail

// Damped alternating best responses from the ideal points, then a Newton
// polish of the first-order-condition system. Uniqueness is certified
// numerically: a second start from the tied midpoint pair must agree, and
// every sampled utility slice must be unimodal.
inline EquilibriumResult solve_nash(const Scenario1D& s, const SolveOptions& opt = {}) {
  s.validate();
  const StrategyPair start =
      opt.seed.value_or(StrategyPair{s.d_left.ideal, s.d_right.ideal});
  const auto raw = detail::solve_raw(s, start, opt);

  if (opt.multi_start) {
    const double c = 0.5 * (s.d_left.ideal + s.d_right.ideal);
    const auto alt = detail::solve_raw(s, {c, c}, opt);
    const double gap = std::max(std::abs(alt.pair.left - raw.pair.left),
                                std::abs(alt.pair.right - raw.pair.right));
    if (gap > 1e-6) {
      std::ostringstream msg;
      msg << "multi-start solutions disagree: (" << raw.pair.left << ", "
          << raw.pair.right << ") vs (" << alt.pair.left << ", " << alt.pair.right
          << ")";
      throw NonUnique(msg.str());
    }
  }

  EquilibriumResult result;
  result.pair = raw.pair;
  result.left_flag = raw.left_flag;
  result.right_flag = raw.right_flag;
  result.iterations = raw.iterations;
  const Foc f = foc(s, result.pair);
  result.foc_residual = {f.left, f.right};
  result.hessian = foc_jacobian(s, result.pair);
  // interior stationary points must be local maxima
  if (result.left_flag == BoundaryFlag::Interior && result.hessian.a >= 0.0)
    throw NoConvergence("left own-curvature is not negative at the solution");
  if (result.right_flag == BoundaryFlag::Interior && result.hessian.d >= 0.0)
    throw NoConvergence("right own-curvature is not negative at the solution");
  if (opt.run_certification) result.diagnostics = certify(s, result);

  // mutual-best-response check at the solved point
  const double bl = best_response_left(s, result.pair.right);
  const double br = best_response_right(s, result.pair.left);
  if (std::abs(bl - result.pair.left) > 1e-6 || std::abs(br - result.pair.right) > 1e-6)
    throw NoConvergence("solved pair fails the mutual best-response check");
  return result;
}

}  // namespace polequil
