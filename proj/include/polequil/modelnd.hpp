#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polequil/errors.hpp"
#include "polequil/functions.hpp"
#include "polequil/linalg.hpp"
#include "polequil/model1d.hpp"
#include "polequil/quadrature.hpp"

namespace polequil {

enum class RegionMode { Box, Bisector };

// Motivation over n policy axes: sum_i a_i x_i^2 + constant.
struct MotivationND {
  std::vector<double> quad;
  double constant = 0.0;

  double value(const std::vector<double>& x) const {
    double v = constant;
    for (std::size_t i = 0; i < quad.size(); ++i) v += quad[i] * x[i] * x[i];
    return v;
  }
};

// Per-axis quadratic deviation cost: sum_i k_i (x_i - ideal_i)^2.
struct DeviationCostND {
  std::vector<double> k;
  std::vector<double> ideal;

  double value(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
      v += k[i] * (x[i] - ideal[i]) * (x[i] - ideal[i]);
    return v;
  }
  double partial(const std::vector<double>& x, std::size_t i) const {
    return 2.0 * k[i] * (x[i] - ideal[i]);
  }
};

// n-dimensional scenario over the cube [-1, 1]^n with a product voter
// density, a feasibility cost on policy bundles, and a choice of vote-share
// region rule. The box rule keeps the literal per-axis interval domains; the
// bisector rule assigns each voter to the nearer party, which is the default
// because it partitions the cube.
struct ScenarioND {
  std::size_t dim = 2;
  std::vector<Pdf1D> g;  // one factor per axis
  CostCdf fc;
  MotivationND m;
  DeviationCostND d_left, d_right;
  Feasibility phi;
  RegionMode region = RegionMode::Bisector;
  int quad_order = 32;
  std::vector<std::string> axis_names;

  void validate() const {
    if (dim < 1 || dim > 3)
      throw ValidationError("dimension must lie in [1, 3]");
    if (g.size() != dim || m.quad.size() != dim || d_left.k.size() != dim ||
        d_right.k.size() != dim || d_left.ideal.size() != dim ||
        d_right.ideal.size() != dim || phi.gradient.size() != dim)
      throw DimensionMismatch("scenario fields disagree on the dimension");
    for (const auto& pdf : g)
      if (!pdf.is_normalized()) throw ValidationError("axis pdf not normalized");
    for (std::size_t i = 0; i < dim; ++i) {
      if (d_left.k[i] < 0.0 || d_right.k[i] < 0.0)
        throw ValidationError("deviation coefficients must be >= 0");
      if (std::abs(d_left.ideal[i]) > 1.0 + 1e-12 ||
          std::abs(d_right.ideal[i]) > 1.0 + 1e-12)
        throw ValidationError("ideal points must lie in the cube");
      if (m.quad[i] < 0.0)
        throw ValidationError("motivation must be convex per axis");
    }
    if (quad_order < 2) throw ValidationError("quadrature order must be >= 2");
  }

  double turnout(const std::vector<double>& x) const {
    double density = 1.0;
    for (std::size_t i = 0; i < dim; ++i) density *= g[i].value(x[i]);
    return density * fc.value(m.value(x));
  }
};

struct StrategyPairND {
  std::vector<double> left;
  std::vector<double> right;
};

namespace ndgeom {

constexpr double kTinyAxis = 1e-14;

// integral of f over {x in [-1,1]^n : <d, x> <= c} by iterated quadrature
// with exact inner bounds; each outer axis splits at the points where the
// section's clip topology changes (the plane passing a corner of the
// remaining sub-cube), so every sub-integral is smooth.
template <class F>
double halfspace_recurse(F&& f, std::vector<double>& x, std::size_t axis,
                         const std::vector<double>& d, double c, int order) {
  const std::size_t n = d.size();
  const GaussRule& rule = gauss_rule(order);

  if (axis == n - 1) {
    const double dd = d[axis];
    double lo = -1.0, hi = 1.0;
    if (std::abs(dd) < kTinyAxis) {
      if (c < 0.0) return 0.0;
    } else if (dd > 0.0) {
      hi = std::min(1.0, c / dd);
    } else {
      lo = std::max(-1.0, c / dd);
    }
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      x[axis] = mid + half * rule.nodes[q];
      sum += rule.weights[q] * f(x);
    }
    return half * sum;
  }

  std::vector<double> cuts{-1.0, 1.0};
  if (std::abs(d[axis]) > kTinyAxis) {
    const std::size_t rest = n - axis - 1;
    for (std::size_t corner = 0; corner < (std::size_t(1) << rest); ++corner) {
      double shift = 0.0;
      for (std::size_t j = 0; j < rest; ++j)
        shift += d[axis + 1 + j] * ((corner >> j) & 1 ? 1.0 : -1.0);
      const double v = (c - shift) / d[axis];
      if (v > -1.0 + 1e-13 && v < 1.0 - 1e-13) cuts.push_back(v);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double lo = cuts[seg], hi = cuts[seg + 1];
    if (hi - lo < 1e-14) continue;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double v = mid + half * rule.nodes[q];
      x[axis] = v;
      total += half * rule.weights[q] *
               halfspace_recurse(f, x, axis + 1, d, c - d[axis] * v, order);
    }
  }
  return total;
}

template <class F>
double halfspace_integral(F&& f, const std::vector<double>& d, double c, int order) {
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  std::vector<double> x(d.size(), 0.0);
  if (scale < kTinyAxis) {
    if (c < 0.0) return 0.0;
    // unconstrained cube integral
    std::vector<double> no_d(d.size(), 0.0);
    std::function<double(std::size_t)> tensor = [&](std::size_t axis) -> double {
      const GaussRule& rule = gauss_rule(order);
      double sum = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        x[axis] = rule.nodes[q];
        sum += rule.weights[q] * (axis + 1 == d.size() ? f(x) : tensor(axis + 1));
      }
      return sum;
    };
    return tensor(0);
  }
  return halfspace_recurse(f, x, 0, d, c, order);
}

// tensor-product integral of f over the box [lo, hi]
template <class F>
double box_integral(F&& f, const std::vector<double>& lo, const std::vector<double>& hi,
                    int order) {
  const std::size_t n = lo.size();
  for (std::size_t i = 0; i < n; ++i)
    if (hi[i] <= lo[i]) return 0.0;
  const GaussRule& rule = gauss_rule(order);
  std::vector<double> x(n, 0.0);
  std::function<double(std::size_t)> tensor = [&](std::size_t axis) -> double {
    const double mid = 0.5 * (lo[axis] + hi[axis]);
    const double half = 0.5 * (hi[axis] - lo[axis]);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      x[axis] = mid + half * rule.nodes[q];
      sum += rule.weights[q] * (axis + 1 == n ? f(x) : tensor(axis + 1));
    }
    return half * sum;
  };
  return tensor(0);
}

// vertices of the cut {<d, x> = c} within the cube, deduplicated
inline std::vector<std::vector<double>> plane_cube_vertices(
    const std::vector<double>& d, double c) {
  const std::size_t n = d.size();
  std::vector<std::vector<double>> pts;
  auto push_unique = [&](const std::vector<double>& p) {
    for (const auto& q : pts) {
      double dist = 0.0;
      for (std::size_t i = 0; i < n; ++i) dist += std::abs(p[i] - q[i]);
      if (dist < 1e-11) return;
    }
    pts.push_back(p);
  };
  if (n == 1) {
    if (std::abs(d[0]) > kTinyAxis) {
      const double v = c / d[0];
      if (std::abs(v) <= 1.0) push_unique({v});
    }
    return pts;
  }
  // walk every cube edge: fix all axes but one at +-1, solve for the free one
  for (std::size_t free_axis = 0; free_axis < n; ++free_axis) {
    if (std::abs(d[free_axis]) < kTinyAxis) continue;
    const std::size_t rest = n - 1;
    for (std::size_t corner = 0; corner < (std::size_t(1) << rest); ++corner) {
      std::vector<double> p(n, 0.0);
      double shift = 0.0;
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free_axis) continue;
        p[i] = ((corner >> bit) & 1) ? 1.0 : -1.0;
        shift += d[i] * p[i];
        ++bit;
      }
      const double v = (c - shift) / d[free_axis];
      if (std::abs(v) <= 1.0 + 1e-12) {
        p[free_axis] = std::clamp(v, -1.0, 1.0);
        push_unique(p);
      }
    }
  }
  return pts;
}

// surface integral of f over the plane {<d, x> = c} clipped to the cube
template <class F>
double plane_cube_surface_integral(F&& f, const std::vector<double>& d, double c,
                                   int order) {
  const std::size_t n = d.size();
  auto pts = plane_cube_vertices(d, c);
  if (n == 1) return pts.empty() ? 0.0 : f(pts[0]);

  if (n == 2) {
    if (pts.size() < 2) return 0.0;
    // keep the two farthest points in case a corner hit duplicated
    std::size_t ia = 0, ib = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double len = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
        if (len > best) {
          best = len;
          ia = i;
          ib = j;
        }
      }
    if (best < 1e-13) return 0.0;
    const GaussRule& rule = gauss_rule(order);
    double sum = 0.0;
    std::vector<double> p(2);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (1.0 + rule.nodes[q]);
      p[0] = pts[ia][0] + t * (pts[ib][0] - pts[ia][0]);
      p[1] = pts[ia][1] + t * (pts[ib][1] - pts[ia][1]);
      sum += rule.weights[q] * f(p);
    }
    return 0.5 * best * sum;
  }

  // n == 3: order the polygon vertices in-plane, then fan-triangulate
  if (pts.size() < 3) return 0.0;
  std::vector<double> centroid(3, 0.0);
  for (const auto& p : pts)
    for (int i = 0; i < 3; ++i) centroid[i] += p[i] / double(pts.size());
  const double dn = std::sqrt(dot(d, d));
  std::vector<double> nrm{d[0] / dn, d[1] / dn, d[2] / dn};
  std::vector<double> u(3), v(3);
  {
    std::vector<double> seed = std::abs(nrm[0]) < 0.9 ? std::vector<double>{1, 0, 0}
                                                      : std::vector<double>{0, 1, 0};
    u = {nrm[1] * seed[2] - nrm[2] * seed[1], nrm[2] * seed[0] - nrm[0] * seed[2],
         nrm[0] * seed[1] - nrm[1] * seed[0]};
    const double un = std::sqrt(dot(u, u));
    for (auto& e : u) e /= un;
    v = {nrm[1] * u[2] - nrm[2] * u[1], nrm[2] * u[0] - nrm[0] * u[2],
         nrm[0] * u[1] - nrm[1] * u[0]};
  }
  std::vector<std::pair<double, std::size_t>> angles;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> rel{pts[i][0] - centroid[0], pts[i][1] - centroid[1],
                            pts[i][2] - centroid[2]};
    angles.push_back({std::atan2(dot(rel, v), dot(rel, u)), i});
  }
  std::sort(angles.begin(), angles.end());

  const GaussRule& rule = gauss_rule(std::max(8, order / 2));
  double total = 0.0;
  std::vector<double> p(3);
  for (std::size_t tri = 1; tri + 1 < angles.size(); ++tri) {
    const auto& a = pts[angles[0].second];
    const auto& b = pts[angles[tri].second];
    const auto& cpt = pts[angles[tri + 1].second];
    std::vector<double> e1{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    std::vector<double> e2{cpt[0] - a[0], cpt[1] - a[1], cpt[2] - a[2]};
    std::vector<double> cr{e1[1] * e2[2] - e1[2] * e2[1],
                           e1[2] * e2[0] - e1[0] * e2[2],
                           e1[0] * e2[1] - e1[1] * e2[0]};
    const double jac = std::sqrt(dot(cr, cr));  // parallelogram area
    if (jac < 1e-15) continue;
    // Duffy map of the unit square onto the triangle
    for (std::size_t qs = 0; qs < rule.nodes.size(); ++qs) {
      const double s = 0.5 * (1.0 + rule.nodes[qs]);
      for (std::size_t qt = 0; qt < rule.nodes.size(); ++qt) {
        const double t = 0.5 * (1.0 + rule.nodes[qt]);
        const double alpha = s * (1.0 - t);
        const double beta = t;
        for (int i = 0; i < 3; ++i)
          p[i] = a[i] + alpha * e1[i] + beta * e2[i];
        total += 0.25 * rule.weights[qs] * rule.weights[qt] * (1.0 - t) * jac * f(p);
      }
    }
  }
  return total;
}

}  // namespace ndgeom

namespace nddetail {

inline void check_pair(const ScenarioND& s, const StrategyPairND& p) {
  if (p.left.size() != s.dim || p.right.size() != s.dim)
    throw DimensionMismatch("strategy vectors disagree with the scenario dimension");
  for (std::size_t i = 0; i < s.dim; ++i)
    if (std::abs(p.left[i]) > 1.0 + 1e-9 || std::abs(p.right[i]) > 1.0 + 1e-9)
      throw ValidationError("strategies must lie in the cube");
}

// bisector half-space of the left party: <d, x> <= c with d = x_r - x_l
struct Bisector {
  std::vector<double> d;
  double c = 0.0;
  bool degenerate = false;  // coincident strategies
};

inline Bisector bisector_of(const StrategyPairND& p) {
  Bisector b;
  const std::size_t n = p.left.size();
  b.d.resize(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b.d[i] = p.right[i] - p.left[i];
    b.c += b.d[i] * 0.5 * (p.left[i] + p.right[i]);
    scale = std::max(scale, std::abs(b.d[i]));
  }
  b.degenerate = scale < 1e-12;
  return b;
}

inline double share_left(const ScenarioND& s, const StrategyPairND& p) {
  auto t = [&](const std::vector<double>& x) { return s.turnout(x); };
  if (s.region == RegionMode::Box) {
    std::vector<double> lo(s.dim, -1.0), hi(s.dim);
    for (std::size_t i = 0; i < s.dim; ++i)
      hi[i] = 0.5 * (p.left[i] + p.right[i]);
    return ndgeom::box_integral(t, lo, hi, s.quad_order);
  }
  const Bisector b = bisector_of(p);
  if (b.degenerate) {  // coincident strategies split the electorate evenly
    std::vector<double> lo(s.dim, -1.0), hi(s.dim, 1.0);
    return 0.5 * ndgeom::box_integral(t, lo, hi, s.quad_order);
  }
  return ndgeom::halfspace_integral(t, b.d, b.c, s.quad_order);
}

inline double share_right(const ScenarioND& s, const StrategyPairND& p) {
  auto t = [&](const std::vector<double>& x) { return s.turnout(x); };
  if (s.region == RegionMode::Box) {
    std::vector<double> lo(s.dim), hi(s.dim, 1.0);
    for (std::size_t i = 0; i < s.dim; ++i)
      lo[i] = 0.5 * (p.left[i] + p.right[i]);
    return ndgeom::box_integral(t, lo, hi, s.quad_order);
  }
  const Bisector b = bisector_of(p);
  std::vector<double> lo(s.dim, -1.0), hi(s.dim, 1.0);
  const double total = ndgeom::box_integral(t, lo, hi, s.quad_order);
  if (b.degenerate) return 0.5 * total;
  return total - ndgeom::halfspace_integral(t, b.d, b.c, s.quad_order);
}

}  // namespace nddetail

inline double utility_nd(const ScenarioND& s, Side side, const StrategyPairND& p) {
  nddetail::check_pair(s, p);
  if (side == Side::Left)
    return nddetail::share_left(s, p) - s.d_left.value(p.left) - s.phi.value(p.left);
  return nddetail::share_right(s, p) - s.d_right.value(p.right) - s.phi.value(p.right);
}

// Analytic gradient of a party's utility with respect to its own strategy.
// Box mode reduces to half the turnout integral over the moving face; the
// bisector mode is a surface integral over the clipped separating plane with
// the boundary-velocity weight of the moving half-space.
inline std::vector<double> utility_grad_own(const ScenarioND& s, Side side,
                                            const StrategyPairND& p) {
  nddetail::check_pair(s, p);
  const std::size_t n = s.dim;
  std::vector<double> grad(n, 0.0);
  auto t = [&](const std::vector<double>& x) { return s.turnout(x); };

  if (s.region == RegionMode::Box) {
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (p.left[i] + p.right[i]);
    for (std::size_t i = 0; i < n; ++i) {
      if (n == 1) {
        grad[i] = 0.5 * t(mid);
      } else {
        std::vector<double> lo, hi;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          lo.push_back(side == Side::Left ? -1.0 : mid[j]);
          hi.push_back(side == Side::Left ? mid[j] : 1.0);
        }
        auto face = [&](const std::vector<double>& rest) {
          std::vector<double> x(n);
          std::size_t r = 0;
          for (std::size_t j = 0; j < n; ++j) x[j] = (j == i) ? mid[i] : rest[r++];
          return t(x);
        };
        grad[i] = 0.5 * ndgeom::box_integral(face, lo, hi, s.quad_order);
      }
      if (side == Side::Right) grad[i] = -grad[i];
    }
  } else {
    const nddetail::Bisector b = nddetail::bisector_of(p);
    if (!b.degenerate) {
      const double dn = std::sqrt(dot(b.d, b.d));
      std::vector<double> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = 0.5 * (p.left[i] + p.right[i]);
      for (std::size_t i = 0; i < n; ++i) {
        auto weighted = [&](const std::vector<double>& x) {
          const double w = (side == Side::Left)
                               ? (x[i] - m[i]) + 0.5 * b.d[i]
                               : (x[i] - m[i]) - 0.5 * b.d[i];
          return t(x) * w / dn;
        };
        grad[i] =
            ndgeom::plane_cube_surface_integral(weighted, b.d, b.c, s.quad_order);
      }
    }
  }

  const auto& d = (side == Side::Left) ? s.d_left : s.d_right;
  const auto& x = (side == Side::Left) ? p.left : p.right;
  const auto phi_grad = s.phi.grad();
  for (std::size_t i = 0; i < n; ++i) grad[i] -= d.partial(x, i) + phi_grad[i];
  return grad;
}

// stacked first-order conditions (grad_left U_left, grad_right U_right)
inline std::vector<double> foc_nd(const ScenarioND& s, const StrategyPairND& p) {
  auto gl = utility_grad_own(s, Side::Left, p);
  auto gr = utility_grad_own(s, Side::Right, p);
  gl.insert(gl.end(), gr.begin(), gr.end());
  return gl;
}

}  // namespace polequil
