#include <catch2/catch.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "polequil/bne.hpp"

using namespace polequil;

namespace {

TypeModel two_type_model(double noise) {
  TypeModel tm;
  tm.candidates = {fixtures::transition1_bell(), fixtures::transition1_double_peak()};
  tm.prior = {0.5, 0.5};
  tm.metric = Divergence::JS;
  tm.radius_left = tm.radius_right = 1.0;
  tm.likelihood_left = confusion_matrix(2, noise);
  tm.likelihood_right = confusion_matrix(2, noise);
  return tm;
}

}  // namespace

TEST_CASE("divergences behave like divergences") {
  const Pdf1D a = fixtures::transition1_bell();
  const Pdf1D b = fixtures::transition1_double_peak();
  for (Divergence m : {Divergence::KL, Divergence::JS, Divergence::Wasserstein1}) {
    CHECK(divergence(m, a, a) == Approx(0.0).margin(1e-10));
    CHECK(divergence(m, a, b) > 1e-3);
  }
  // JS is symmetric and bounded by ln 2
  CHECK(divergence(Divergence::JS, a, b) ==
        Approx(divergence(Divergence::JS, b, a)).margin(1e-12));
  CHECK(divergence(Divergence::JS, a, b) < std::log(2.0));
}

TEST_CASE("build_type_model keeps candidates inside the ball") {
  const Pdf1D center = fixtures::transition1_bell();
  const auto tm = build_type_model(center, Divergence::JS, 0.02, 3, 0.1, 99);
  REQUIRE(tm.size() == 3);
  for (const auto& c : tm.candidates)
    CHECK(divergence(Divergence::JS, c, center) < 0.02);
  CHECK(tm.prior[0] == Approx(1.0 / 3.0));
  // singleton degenerates to the center with an identity channel
  const auto single = build_type_model(center, Divergence::JS, 0.02, 1, 0.0);
  CHECK(single.size() == 1);
  CHECK(single.likelihood_left(0, 0) == Approx(1.0));
}

TEST_CASE("posterior updates") {
  auto tm = two_type_model(0.25);
  const auto p1 = posterior(tm, Side::Left, 0);
  CHECK(p1[0] == Approx(0.75));
  CHECK(p1[1] == Approx(0.25));
  CHECK(p1[0] + p1[1] == Approx(1.0).margin(1e-12));

  tm.likelihood_left = confusion_matrix(2, 0.0);
  const auto exact = posterior(tm, Side::Left, 1);
  CHECK(exact[0] == Approx(0.0).margin(1e-15));
  CHECK(exact[1] == Approx(1.0));

  tm.prior = {1.0, 0.0};  // absorbing prior survives a noisy signal
  tm.likelihood_left = confusion_matrix(2, 0.25);
  const auto absorbed = posterior(tm, Side::Left, 1);
  CHECK(absorbed[0] == Approx(1.0));
  CHECK(absorbed[1] == Approx(0.0).margin(1e-15));

  tm.likelihood_left = confusion_matrix(2, 0.0);
  CHECK_THROWS_AS(posterior(tm, Side::Left, 1), ZeroEvidence);
}

TEST_CASE("type model validation") {
  auto tm = two_type_model(0.25);
  tm.prior = {0.6, 0.6};
  CHECK_THROWS_AS(tm.validate(), ValidationError);
  tm = two_type_model(0.25);
  tm.center = fixtures::transition1_bell();
  tm.radius_left = tm.radius_right = 1e-4;  // double peak cannot fit
  CHECK_THROWS_AS(tm.validate(), ValidationError);
}

TEST_CASE("singleton type model reproduces the deterministic equilibrium") {
  const Scenario1D base = fixtures::transition1(0.0);
  TypeModel tm;
  tm.candidates = {fixtures::transition1_bell()};
  tm.prior = {1.0};
  tm.likelihood_left = confusion_matrix(1, 0.0);
  tm.likelihood_right = confusion_matrix(1, 0.0);
  const auto policy = solve_bne(tm, base);
  const auto eq = solve_nash(base);
  REQUIRE(policy.x_left.size() == 1);
  CHECK(policy.x_left[0] == Approx(eq.pair.left).margin(1e-6));
  CHECK(policy.x_right[0] == Approx(eq.pair.right).margin(1e-6));
  CHECK(policy.deviation_slack <= 1e-6);
}

TEST_CASE("noise-free signals recover the per-type equilibria") {
  const Scenario1D base = fixtures::transition1(0.0);
  const auto tm = two_type_model(0.0);
  const auto policy = solve_bne(tm, base);
  for (std::size_t j = 0; j < 2; ++j) {
    Scenario1D s = base;
    s.g = tm.candidates[j];
    const auto eq = solve_nash(s);
    REQUIRE(policy.x_left[j] == Approx(eq.pair.left).margin(1e-6));
    REQUIRE(policy.x_right[j] == Approx(eq.pair.right).margin(1e-6));
  }
  CHECK(policy.deviation_slack <= 1e-6);
}

TEST_CASE("noisy two-type policies stay inside the complete-information span") {
  const Scenario1D base = fixtures::transition1(0.0);
  const auto tm = two_type_model(0.3);
  const auto policy = solve_bne(tm, base);

  Scenario1D s0 = base;
  s0.g = tm.candidates[0];
  Scenario1D s1 = base;
  s1.g = tm.candidates[1];
  const auto eq0 = solve_nash(s0);
  const auto eq1 = solve_nash(s1);
  const double lo_l = std::min(eq0.pair.left, eq1.pair.left) - 1e-9;
  const double hi_l = std::max(eq0.pair.left, eq1.pair.left) + 1e-9;
  const double lo_r = std::min(eq0.pair.right, eq1.pair.right) - 1e-9;
  const double hi_r = std::max(eq0.pair.right, eq1.pair.right) + 1e-9;
  for (std::size_t j = 0; j < 2; ++j) {
    REQUIRE(policy.x_left[j] >= lo_l);
    REQUIRE(policy.x_left[j] <= hi_l);
    REQUIRE(policy.x_right[j] >= lo_r);
    REQUIRE(policy.x_right[j] <= hi_r);
  }
  CHECK(policy.deviation_slack <= 1e-6);
}

TEST_CASE("no profitable deviation on a literal strategy grid") {
  const Scenario1D base = fixtures::transition1(0.0);
  const auto tm = two_type_model(0.3);
  const auto policy = solve_bne(tm, base);
  // exhaustive 201-point deviation scan for the left party, every signal
  for (std::size_t jl = 0; jl < 2; ++jl) {
    const auto post = posterior(tm, Side::Left, jl);
    auto eu_left = [&](double y) {
      double eu = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        Scenario1D s = base;
        s.g = tm.candidates[i];
        for (std::size_t jr = 0; jr < 2; ++jr) {
          const double w = post[i] * tm.likelihood_right(i, jr);
          if (w == 0.0) continue;
          eu += w * oracles::simpson(
                        [&](double x) { return s.turnout(x); }, -1.0,
                        0.5 * (y + policy.x_right[jr]), 2000);
        }
      }
      return eu - base.d_left.value(y);
    };
    const double at_policy = eu_left(policy.x_left[jl]);
    for (int gi = 0; gi <= 200; ++gi) {
      const double y = -1.0 + 2.0 * gi / 200.0;
      REQUIRE(eu_left(y) <= at_policy + 1e-6);
    }
  }
}

TEST_CASE("information value on the mirror-shifted two-type example") {
  // The share pie is fixed per type, so across the whole family the joint
  // value of information is the saved expected deviation cost, which convexity
  // caps at zero. The mirror-shifted pair with symmetric costs is the boundary
  // case: both types induce the same equilibrium, so noise-free signals are
  // worth exactly as much as uninformative ones, up to solver precision.
  const Scenario1D base = fixtures::ex1();
  auto model = [&](double noise) {
    TypeModel tm;
    tm.candidates = {normalize_pdf(Pdf1D::bell(-0.3, 0.5, 0.0)),
                     normalize_pdf(Pdf1D::bell(0.3, 0.5, 0.0))};
    tm.prior = {0.5, 0.5};
    tm.likelihood_left = confusion_matrix(2, noise);
    tm.likelihood_right = confusion_matrix(2, noise);
    return tm;
  };
  const auto sharp = solve_bne(model(0.0), base);
  const auto fuzzy = solve_bne(model(0.5), base);
  const auto v_sharp = expected_policy_value(model(0.0), base, sharp);
  const auto v_fuzzy = expected_policy_value(model(0.5), base, fuzzy);
  CHECK(v_sharp[0] >= v_fuzzy[0] - 1e-7);
  CHECK(v_sharp[1] >= v_fuzzy[1] - 1e-7);
  // the joint cap itself, on an asymmetric pair where information moves play
  const Scenario1D tbase = fixtures::transition1(0.0);
  const auto t_sharp = solve_bne(two_type_model(0.0), tbase);
  const auto t_fuzzy = solve_bne(two_type_model(0.5), tbase);
  const auto tv_sharp = expected_policy_value(two_type_model(0.0), tbase, t_sharp);
  const auto tv_fuzzy = expected_policy_value(two_type_model(0.5), tbase, t_fuzzy);
  CHECK(tv_sharp[0] + tv_sharp[1] <= tv_fuzzy[0] + tv_fuzzy[1] + 1e-9);
}

TEST_CASE("radius smaller than any representable perturbation is refused") {
  const Pdf1D center = fixtures::transition1_bell();
  CHECK_THROWS_AS(build_type_model(center, Divergence::JS, 1e-13, 3, 0.1),
                  RadiusTooSmall);
}
