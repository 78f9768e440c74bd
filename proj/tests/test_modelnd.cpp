#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "fixtures_nd.hpp"
#include "oracles.hpp"
#include "polequil/solvernd.hpp"

using namespace polequil;

namespace {

// midpoint-rule Riemann sum over the bisector cell assignment
double riemann_share_left(const ScenarioND& s, const StrategyPairND& p, int n) {
  const double h = 2.0 / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::vector<double> x{-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h};
      double dl = 0.0, dr = 0.0;
      for (int k = 0; k < 2; ++k) {
        dl += (x[k] - p.left[k]) * (x[k] - p.left[k]);
        dr += (x[k] - p.right[k]) * (x[k] - p.right[k]);
      }
      if (dl <= dr) sum += s.turnout(x) * h * h;
    }
  }
  return sum;
}

ScenarioND one_dim_wrap(const Scenario1D& s1) {
  ScenarioND s;
  s.dim = 1;
  s.g = {s1.g};
  s.fc = s1.fc;
  // motivation must be a pure even quadratic to transfer exactly
  s.m = MotivationND{{s1.m.coeffs.size() > 2 ? s1.m.coeffs[2] : 0.0},
                     s1.m.coeffs.empty() ? 0.0 : s1.m.coeffs[0]};
  s.d_left = {{s1.d_left.k}, {s1.d_left.ideal}};
  s.d_right = {{s1.d_right.k}, {s1.d_right.ideal}};
  s.phi = Feasibility::none(1);
  return s;
}

}  // namespace

TEST_CASE("one-dimensional reduction reproduces the 1-D utilities") {
  const Scenario1D s1 = fixtures::ex1();
  const ScenarioND s = one_dim_wrap(s1);
  const StrategyPairND p{{-0.44}, {0.61}};
  const StrategyPair p1{-0.44, 0.61};
  CHECK(utility_nd(s, Side::Left, p) == Approx(utility_left(s1, p1)).margin(1e-9));
  CHECK(utility_nd(s, Side::Right, p) == Approx(utility_right(s1, p1)).margin(1e-9));
}

TEST_CASE("two-dimensional utilities match the Riemann oracle") {
  const ScenarioND s = fixtures::ex2d();
  const StrategyPairND p{{-0.7, -0.5}, {0.6, 0.6}};
  const double share = riemann_share_left(s, p, 401);
  const double lib = utility_nd(s, Side::Left, p) + s.d_left.value(p.left) +
                     s.phi.value(p.left);
  CHECK(lib == Approx(share).margin(1e-4));

  const double share_r = nddetail::share_right(s, p);
  const double lib_r = utility_nd(s, Side::Right, p) + s.d_right.value(p.right) +
                       s.phi.value(p.right);
  CHECK(lib_r == Approx(share_r).margin(1e-12));
  // the two shares partition the total turnout
  std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  const double total = ndgeom::box_integral(
      [&](const std::vector<double>& x) { return s.turnout(x); }, lo, hi, 32);
  CHECK(nddetail::share_left(s, p) + share_r == Approx(total).margin(1e-10));
}

TEST_CASE("box mode matches an iterated-interval oracle") {
  ScenarioND s = fixtures::ex2d();
  s.region = RegionMode::Box;
  const StrategyPairND p{{-0.5, -0.3}, {0.4, 0.5}};
  std::vector<double> lo{-1.0, -1.0};
  std::vector<double> hi{0.5 * (p.left[0] + p.right[0]), 0.5 * (p.left[1] + p.right[1])};
  const double oracle = oracles::simpson(
      [&](double x0) {
        return oracles::simpson(
            [&](double x1) {
              return s.turnout({x0, x1});
            },
            lo[1], hi[1], 400);
      },
      lo[0], hi[0], 400);
  const double lib = utility_nd(s, Side::Left, p) + s.d_left.value(p.left) +
                     s.phi.value(p.left);
  CHECK(lib == Approx(oracle).margin(1e-8));
}

TEST_CASE("mirror pairs give equal utilities in a symmetric scenario") {
  const ScenarioND s = fixtures::symmetric2d();
  const StrategyPairND p{{-0.45, -0.45}, {0.45, 0.45}};
  CHECK(utility_nd(s, Side::Left, p) ==
        Approx(utility_nd(s, Side::Right, p)).margin(1e-10));
}

TEST_CASE("utility dimension checks") {
  const ScenarioND s = fixtures::ex2d();
  CHECK_THROWS_AS(utility_nd(s, Side::Left, {{0.1}, {0.2, 0.3}}), DimensionMismatch);
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> xd(-0.7, 0.7);
  for (RegionMode mode : {RegionMode::Bisector, RegionMode::Box}) {
    ScenarioND s = fixtures::ex2d();
    s.region = mode;
    for (int trial = 0; trial < 6; ++trial) {
      StrategyPairND p{{xd(rng), xd(rng)}, {xd(rng), xd(rng)}};
      // keep the pair separated and inside the cube so the bisector and the
      // finite-difference probes stay well defined
      p.left[0] = std::clamp(p.left[0], -0.9, 0.4);
      p.right[0] = std::min(0.9, p.left[0] + 0.35 + 0.3 * std::abs(xd(rng)));
      p.right[1] = std::clamp(p.right[1] + 0.2, -0.9, 0.9);
      for (Side side : {Side::Left, Side::Right}) {
        const auto grad = utility_grad_own(s, side, p);
        for (std::size_t i = 0; i < 2; ++i) {
          auto slice = [&](double v) {
            StrategyPairND q = p;
            ((side == Side::Left) ? q.left : q.right)[i] = v;
            return utility_nd(s, side, q);
          };
          const double base = (side == Side::Left) ? p.left[i] : p.right[i];
          const double fd = oracles::central_diff(slice, base, 1e-5);
          REQUIRE(grad[i] == Approx(fd).margin(1e-5));
        }
      }
    }
  }
}

TEST_CASE("solve_nash_nd on the two-axis example") {
  const ScenarioND s = fixtures::ex2d();
  const auto eq = solve_nash_nd(s);
  CHECK(eq.interior());
  CHECK(eq.residual_norm < 1e-6);
  CHECK(eq.worst_slice_maxima == 1);
  // parties end up between their ideals on both axes
  for (int i = 0; i < 2; ++i) {
    CHECK(eq.pair.left[i] > s.d_left.ideal[i] - 1e-9);
    CHECK(eq.pair.right[i] < s.d_right.ideal[i] + 1e-9);
  }
}

TEST_CASE("huge deviation costs pin the ND equilibrium at the ideals") {
  ScenarioND s = fixtures::ex2d();
  s.d_left.k = {1e6, 1e6};
  s.d_right.k = {1e6, 1e6};
  const auto eq = solve_nash_nd(s);
  for (int i = 0; i < 2; ++i) {
    CHECK(eq.pair.left[i] == Approx(s.d_left.ideal[i]).margin(1e-4));
    CHECK(eq.pair.right[i] == Approx(s.d_right.ideal[i]).margin(1e-4));
  }
}

TEST_CASE("n=1 bisector solve agrees with the 1-D solver") {
  std::mt19937 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    Scenario1D s1 = fixtures::random_scenario(rng);
    s1.m.coeffs = {s1.m.coeffs[0], 0.0, s1.m.coeffs[2]};
    const auto eq1 = solve_nash(s1);
    const auto eqn = solve_nash_nd(one_dim_wrap(s1));
    REQUIRE(eqn.pair.left[0] == Approx(eq1.pair.left).margin(1e-7));
    REQUIRE(eqn.pair.right[0] == Approx(eq1.pair.right).margin(1e-7));
  }
}

TEST_CASE("separable symmetric scenario splits into per-axis problems") {
  const ScenarioND s = fixtures::symmetric2d();
  const auto eq = solve_nash_nd(s);
  // both axes are identical, so the equilibrium must be axis-symmetric
  CHECK(eq.pair.left[0] == Approx(eq.pair.left[1]).margin(1e-7));
  CHECK(eq.pair.right[0] == Approx(eq.pair.right[1]).margin(1e-7));
  CHECK(eq.pair.left[0] == Approx(-eq.pair.right[0]).margin(1e-7));
}

TEST_CASE("feasibility perturbation directions and simplification ladder") {
  const ScenarioND s = fixtures::ex2d();
  const auto eq = solve_nash_nd(s);

  SECTION("null perturbation") {
    const auto rep = perturb_feasibility(s, eq, 0.0, /*with_oracle=*/false);
    for (double v : rep.dx_full) CHECK(v == Approx(0.0).margin(1e-15));
    for (double v : rep.dx_cross_free) CHECK(v == Approx(0.0).margin(1e-15));
    for (double v : rep.dx_diagonal) CHECK(v == Approx(0.0).margin(1e-15));
  }

  SECTION("strengthening the feasibility cost lowers welfare, raises tax") {
    const auto rep = perturb_feasibility(s, eq, 0.2);
    // axis 0 = welfare (positive phi gradient), axis 1 = tax (negative)
    CHECK(rep.dx_diagonal[0] < 0.0);  // left welfare
    CHECK(rep.dx_diagonal[1] > 0.0);  // left tax
    CHECK(rep.dx_diagonal[2] < 0.0);  // right welfare
    CHECK(rep.dx_diagonal[3] > 0.0);  // right tax
    CHECK(rep.dx_full[0] < 0.0);
    CHECK(rep.dx_full[1] > 0.0);
    CHECK(rep.dx_full[2] < 0.0);
    CHECK(rep.dx_full[3] > 0.0);
    CHECK(rep.linear_residual < 1e-12);
    // oracle agrees to first order
    REQUIRE(rep.has_oracle);
    for (int i = 0; i < 4; ++i)
      CHECK(rep.dx_oracle[i] == Approx(rep.dx_full[i]).margin(5e-3));
    // the simplification ladder stays within the cross-block correction scale
    double gap = 0.0;
    for (int i = 0; i < 4; ++i)
      gap = std::max(gap, std::abs(rep.dx_full[i] - rep.dx_cross_free[i]));
    CHECK(gap <= 10.0 * rep.cross_block_norm * norm_inf(rep.dx_full));
  }

  SECTION("boundary equilibria are refused") {
    EquilibriumResultND fake = eq;
    fake.left_flags[0] = BoundaryFlag::Upper;
    CHECK_THROWS_AS(perturb_feasibility(s, fake, 0.1), BoundaryEquilibrium);
  }
}

TEST_CASE("phi-scale sweep moves tax up and welfare down") {
  const ScenarioND s = fixtures::ex2d();
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(0.5 + 1.5 * i / 15.0);
  const auto path = sweep_phi_scale(s, grid);
  REQUIRE(path.points.size() == 16);
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const auto& prev = path.points[i - 1].pair;
    const auto& cur = path.points[i].pair;
    REQUIRE(cur.left[0] < prev.left[0]);    // welfare falls
    REQUIRE(cur.right[0] < prev.right[0]);
    REQUIRE(cur.left[1] > prev.left[1]);    // tax rises
    REQUIRE(cur.right[1] > prev.right[1]);
  }
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    REQUIRE(path.points[i].residual_norm < 1e-6);
    REQUIRE(path.cond_left[i] > 0.0);
  }
}

TEST_CASE("zero feasibility gives a constant sweep; flipped signs reverse it") {
  ScenarioND s = fixtures::ex2d();
  s.phi = Feasibility::none(2);
  const auto flat = sweep_phi_scale(s, {0.5, 1.0, 2.0});
  for (const auto& pt : flat.points) {
    REQUIRE(pt.pair.left[0] == Approx(flat.points[0].pair.left[0]).margin(1e-8));
    REQUIRE(pt.pair.right[1] == Approx(flat.points[0].pair.right[1]).margin(1e-8));
  }

  ScenarioND flipped = fixtures::ex2d();
  flipped.phi.gradient = {-0.1, 0.1};
  const auto path = sweep_phi_scale(flipped, {0.5, 1.0, 1.5, 2.0});
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    REQUIRE(path.points[i].pair.left[0] > path.points[i - 1].pair.left[0]);
    REQUIRE(path.points[i].pair.left[1] < path.points[i - 1].pair.left[1]);
  }
}

TEST_CASE("the joint product density integrates to one") {
  const ScenarioND s = fixtures::ex2d();
  std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  const double mass = ndgeom::box_integral(
      [&](const std::vector<double>& x) {
        return s.g[0].value(x[0]) * s.g[1].value(x[1]);
      },
      lo, hi, 48);
  CHECK(mass == Approx(1.0).margin(1e-6));
}

TEST_CASE("three-axis bisector shares and gradients") {
  ScenarioND s;
  s.dim = 3;
  s.g = {normalize_pdf(Pdf1D::bell(0.1, 0.5, 0.0)),
         normalize_pdf(Pdf1D::bell(0.0, 0.6, 0.0)),
         normalize_pdf(Pdf1D::bell(-0.1, 0.5, 0.0))};
  s.fc = CostCdf::identity();
  s.m = MotivationND{{0.2, 0.2, 0.2}, 0.3};
  s.d_left = {{1.0, 1.0, 1.0}, {-0.6, -0.5, -0.4}};
  s.d_right = {{1.0, 1.0, 1.0}, {0.5, 0.6, 0.4}};
  s.phi = Feasibility{{0.1, 0.0, -0.1}, 1.0};
  s.quad_order = 24;
  s.validate();

  const StrategyPairND p{{-0.45, -0.3, -0.25}, {0.4, 0.35, 0.3}};

  SECTION("share against a midpoint Riemann oracle") {
    const int n = 161;
    const double h = 2.0 / n;
    double oracle = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const std::vector<double> x{-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h,
                                      -1.0 + (k + 0.5) * h};
          double dl = 0.0, dr = 0.0;
          for (int c = 0; c < 3; ++c) {
            dl += (x[c] - p.left[c]) * (x[c] - p.left[c]);
            dr += (x[c] - p.right[c]) * (x[c] - p.right[c]);
          }
          if (dl <= dr) oracle += s.turnout(x) * h * h * h;
        }
    const double share = nddetail::share_left(s, p);
    CHECK(share == Approx(oracle).margin(2e-3));
    // the two shares partition the cube total
    std::vector<double> lo(3, -1.0), hi(3, 1.0);
    const double total = ndgeom::box_integral(
        [&](const std::vector<double>& x) { return s.turnout(x); }, lo, hi, 24);
    CHECK(share + nddetail::share_right(s, p) == Approx(total).margin(1e-9));
  }

  SECTION("analytic gradients match finite differences") {
    for (Side side : {Side::Left, Side::Right}) {
      const auto grad = utility_grad_own(s, side, p);
      for (std::size_t i = 0; i < 3; ++i) {
        auto slice = [&](double v) {
          StrategyPairND q = p;
          ((side == Side::Left) ? q.left : q.right)[i] = v;
          return utility_nd(s, side, q);
        };
        const double base = (side == Side::Left) ? p.left[i] : p.right[i];
        const double fd = oracles::central_diff(slice, base, 1e-5);
        REQUIRE(grad[i] == Approx(fd).margin(1e-5));
      }
    }
  }

  SECTION("the game solves to an interior ordered equilibrium") {
    const auto eq = solve_nash_nd(s);
    CHECK(eq.interior());
    CHECK(eq.residual_norm < 1e-6);
    for (int i = 0; i < 3; ++i) {
      CHECK(eq.pair.left[i] > s.d_left.ideal[i] - 1e-9);
      CHECK(eq.pair.right[i] < s.d_right.ideal[i] + 1e-9);
    }
  }
}

TEST_CASE("cross-axis shares damp the per-axis pull toward the median") {
  // with a fully separable turnout the box-mode share gradient on one axis
  // carries the opposing axis's half share as a factor, so the displacement
  // from the ideal is exactly half of the isolated 1-D game's
  ScenarioND s;
  s.dim = 2;
  s.g = {normalize_pdf(Pdf1D::bell(0.0, 0.5, 0.0)),
         normalize_pdf(Pdf1D::bell(0.0, 0.5, 0.0))};
  s.fc = CostCdf::affine(1000.0);  // saturated: turnout = g1 g2
  s.m = MotivationND{{0.0, 0.0}, 1.0};
  s.d_left = {{0.8, 0.8}, {-0.6, -0.6}};
  s.d_right = {{0.8, 0.8}, {0.6, 0.6}};
  s.phi = Feasibility::none(2);
  s.region = RegionMode::Box;
  const auto eq = solve_nash_nd(s);

  Scenario1D s1;
  s1.g = s.g[0];
  s1.fc = CostCdf::affine(1000.0);
  s1.m = Motivation{{1.0}};
  s1.d_left = {0.8, -0.6};
  s1.d_right = {0.8, 0.6};
  const auto eq1 = solve_nash(s1);

  const double nd_disp = 0.6 - eq.pair.right[0];
  const double one_d_disp = 0.6 - eq1.pair.right;
  CHECK(nd_disp == Approx(0.5 * one_d_disp).margin(1e-9));
  // the bisector region couples the axes less severely but still damps
  s.region = RegionMode::Bisector;
  const auto eqb = solve_nash_nd(s);
  CHECK(0.6 - eqb.pair.right[0] > nd_disp);
  CHECK(0.6 - eqb.pair.right[0] < one_d_disp);
}
