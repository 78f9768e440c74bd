#pragma once

// Shared scenario fixtures: the bell-curve example driving the deviation-cost
// analysis, the two single-to-double-peak transition families, and seeded
// random scenario generators for the property suites.

#include <cmath>
#include <random>
#include <vector>

#include "polequil/model1d.hpp"

namespace fixtures {

using namespace polequil;

inline Scenario1D ex1(double k_left = 0.6, double k_right = 0.6) {
  Scenario1D s;
  s.g = normalize_pdf(Pdf1D::bell(0.0, 0.5, std::exp(-2.0)));
  s.fc = CostCdf::affine(0.5);
  s.m = Motivation{{1.0, 0.0, 1.0}};
  s.d_left = {k_left, -0.7};
  s.d_right = {k_right, 0.7};
  return s;
}

inline Pdf1D transition1_bell() {
  return normalize_pdf(Pdf1D::bell(0.0, 0.5, 0.1353));
}

inline Pdf1D transition1_double_peak() {
  return normalize_pdf(
      Pdf1D::gauss_shifted({{0.5, -0.5, 0.3}, {0.5, 0.5, 0.3}}, 0.1246));
}

inline Scenario1D transition1(double alpha) {
  Scenario1D s;
  s.g = mix_pdfs(transition1_bell(), transition1_double_peak(), alpha);
  s.fc = CostCdf::affine(0.5);
  s.m = Motivation{{0.5, 0.0, 1.0}};
  s.d_left = {0.3, -0.7};
  s.d_right = {0.5, 0.8};
  return s;
}

inline Pdf1D transition2_flat_bell() {
  // exp(-x^2/16) - 0.9394, i.e. sigma^2 = 8
  return normalize_pdf(Pdf1D::bell(0.0, std::sqrt(8.0), 0.9394));
}

inline Pdf1D transition2_double_peak() {
  return normalize_pdf(
      Pdf1D::gauss_shifted({{0.5, -0.3, 0.25}, {0.5, 0.3, 0.25}}, 0.0099));
}

inline Scenario1D transition2(double alpha) {
  Scenario1D s;
  s.g = mix_pdfs(transition2_flat_bell(), transition2_double_peak(), alpha);
  s.fc = CostCdf::affine(0.5);
  s.m = Motivation{{0.7, 0.0, 1.0}};
  s.d_left = {0.4, -0.7};
  s.d_right = {0.5, 0.6};
  return s;
}

// Raw gaussian bump sum with an offset scaled off the grid minimum, so the
// density stays non-negative by construction.
inline Pdf1D random_pdf(std::mt19937& rng, bool even) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> mean_d(-0.5, 0.5);
  std::uniform_real_distribution<double> sigma_d(0.3, 0.8);
  std::vector<GaussComponent> comps;
  if (even) {
    if (u01(rng) < 0.5) {
      comps.push_back({1.0, 0.0, sigma_d(rng)});
    } else {
      const double m = 0.2 + 0.4 * u01(rng);
      const double sg = sigma_d(rng);
      comps.push_back({0.5, -m, sg});
      comps.push_back({0.5, m, sg});
    }
  } else {
    const int n = 1 + (u01(rng) < 0.4 ? 1 : 0);
    for (int i = 0; i < n; ++i)
      comps.push_back({u01(rng) * 0.8 + 0.2, mean_d(rng), sigma_d(rng)});
  }
  Pdf1D raw = Pdf1D::gauss_shifted(comps, 0.0);
  double lo = 1e300;
  for (int i = 0; i <= 2000; ++i)
    lo = std::min(lo, raw.raw_value(-1.0 + 2.0 * i / 2000.0));
  return normalize_pdf(Pdf1D::gauss_shifted(comps, 0.9 * u01(rng) * lo));
}

inline Scenario1D random_scenario(std::mt19937& rng, bool symmetric = false) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Scenario1D s;
  s.g = random_pdf(rng, symmetric);
  const double c0 = 0.5 + u01(rng);
  const double c2 = 0.3 + 0.9 * u01(rng);
  s.m = Motivation{{c0, 0.0, c2}};
  // keep F_c(m) off the clamp so the turnout density stays smooth
  s.fc = CostCdf::affine((0.3 + 0.65 * u01(rng)) * 0.95 / (c0 + c2));
  const double ideal = 0.35 + 0.55 * u01(rng);
  const double k = 0.35 + 0.95 * u01(rng);
  if (symmetric) {
    s.d_left = {k, -ideal};
    s.d_right = {k, ideal};
  } else {
    s.d_left = {0.35 + 0.95 * u01(rng), -(0.35 + 0.55 * u01(rng))};
    s.d_right = {k, ideal};
  }
  return s;
}

}  // namespace fixtures
