#pragma once

// The two-axis scenario from the multi-dimensional analysis: product of two
// truncated gaussians, identity cost CDF, quadratic motivation, unit
// per-axis deviation costs, and the linear feasibility form 0.1 (x1 - x2).
// Axis 1 carries the positive feasibility gradient (welfare), axis 2 the
// negative one (tax).

#include "polequil/modelnd.hpp"

namespace fixtures {

using namespace polequil;

inline ScenarioND ex2d() {
  ScenarioND s;
  s.dim = 2;
  s.g = {normalize_pdf(Pdf1D::bell(0.1, 0.5, 0.0)),
         normalize_pdf(Pdf1D::bell(-0.1, 0.5, 0.0))};
  s.fc = CostCdf::identity();
  s.m = MotivationND{{0.25, 0.25}, 0.5};
  s.d_left = {{1.0, 1.0}, {-0.7, -0.5}};
  s.d_right = {{1.0, 1.0}, {0.6, 0.6}};
  s.phi = Feasibility{{0.1, -0.1}, 1.0};
  s.axis_names = {"welfare", "tax"};
  return s;
}

inline ScenarioND symmetric2d() {
  ScenarioND s;
  s.dim = 2;
  s.g = {normalize_pdf(Pdf1D::bell(0.0, 0.5, 0.0)),
         normalize_pdf(Pdf1D::bell(0.0, 0.5, 0.0))};
  s.fc = CostCdf::identity();
  s.m = MotivationND{{0.25, 0.25}, 0.5};
  s.d_left = {{0.8, 0.8}, {-0.6, -0.6}};
  s.d_right = {{0.8, 0.8}, {0.6, 0.6}};
  s.phi = Feasibility::none(2);
  return s;
}

}  // namespace fixtures
