#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "polequil/errors.hpp"

namespace polequil {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes/weights of arbitrary order. Roots of P_n by Newton
// iteration on the three-term recurrence; symmetric pairs filled by mirroring.
inline GaussRule make_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline const GaussRule& gauss_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
  return it->second;
}

template <class F>
double gauss_panel(F&& f, double a, double b, const GaussRule& rule) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(c + h * rule.nodes[i]);
  return h * sum;
}

// Composite Gauss-Legendre over [a, b] with panels no wider than max_width.
template <class F>
double integrate(F&& f, double a, double b, int order, double max_width = 0.25) {
  if (a == b) return 0.0;
  const double sign = (b >= a) ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width)));
  const GaussRule& rule = gauss_rule(order);
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p)
    sum += gauss_panel(f, lo + p * h, lo + (p + 1) * h, rule);
  return sign * sum;
}

// Like integrate(), but verifies stability under node doubling and keeps
// doubling until the change drops below tol. Throws QuadratureFailure when
// the refinement budget is exhausted.
template <class F>
double integrate_checked(F&& f, double a, double b, int order, double tol,
                         int max_doublings = 4) {
  double prev = integrate(f, a, b, order);
  for (int d = 0; d < max_doublings; ++d) {
    order *= 2;
    double next = integrate(f, a, b, order);
    if (std::abs(next - prev) <= tol) return next;
    prev = next;
  }
  throw QuadratureFailure("integral did not stabilise under node doubling (tol " +
                          std::to_string(tol) + ")");
}

}  // namespace polequil
