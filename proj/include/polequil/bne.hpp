#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "polequil/errors.hpp"
#include "polequil/linalg.hpp"
#include "polequil/model1d.hpp"
#include "polequil/solver1d.hpp"

namespace polequil {

enum class Divergence { KL, JS, Wasserstein1 };

// grid divergence between two normalized densities on [-1, 1]
inline double divergence(Divergence metric, const Pdf1D& a, const Pdf1D& b,
                         int grid = 2001) {
  const double h = 2.0 / (grid - 1);
  auto kl_term = [](double p, double q) {
    if (p <= 1e-15) return 0.0;
    return p * std::log(p / std::max(q, 1e-15));
  };
  double acc = 0.0;
  if (metric == Divergence::Wasserstein1) {
    double ca = 0.0, cb = 0.0;
    double pa = a.value(-1.0), pb = b.value(-1.0);
    for (int i = 1; i < grid; ++i) {
      const double x = -1.0 + i * h;
      const double na = a.value(x), nb = b.value(x);
      ca += 0.5 * (pa + na) * h;
      cb += 0.5 * (pb + nb) * h;
      acc += std::abs(ca - cb) * h;
      pa = na;
      pb = nb;
    }
    return acc;
  }
  for (int i = 0; i < grid; ++i) {
    const double x = -1.0 + i * h;
    const double w = (i == 0 || i == grid - 1) ? 0.5 * h : h;
    const double p = a.value(x), q = b.value(x);
    if (metric == Divergence::KL) {
      acc += w * kl_term(p, q);
    } else {
      const double m = 0.5 * (p + q);
      acc += w * (0.5 * kl_term(p, m) + 0.5 * kl_term(q, m));
    }
  }
  return acc;
}

// Finite-type reduction of the unknown-distribution game: K candidate voter
// densities inside a divergence ball around a center, a common prior, and a
// per-party signal channel P(signal j | true type i).
struct TypeModel {
  std::vector<Pdf1D> candidates;
  std::vector<double> prior;
  Divergence metric = Divergence::JS;
  double radius_left = 1.0;
  double radius_right = 1.0;
  Pdf1D center;
  MatN likelihood_left, likelihood_right;

  std::size_t size() const { return candidates.size(); }

  void validate() const {
    const std::size_t k = candidates.size();
    if (k == 0) throw ValidationError("type model needs at least one candidate");
    if (prior.size() != k) throw DimensionMismatch("prior length mismatch");
    double total = 0.0;
    for (double p : prior) {
      if (p < 0.0) throw ValidationError("prior entries must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("prior must sum to 1");
    for (const MatN* lik : {&likelihood_left, &likelihood_right}) {
      if (lik->rows() != k || lik->cols() != k)
        throw DimensionMismatch("likelihood must be K x K");
      for (std::size_t i = 0; i < k; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          if ((*lik)(i, j) < 0.0) throw ValidationError("likelihood entries >= 0");
          row += (*lik)(i, j);
        }
        if (std::abs(row - 1.0) > 1e-12)
          throw ValidationError("likelihood rows must sum to 1");
      }
    }
    if (center.is_normalized()) {
      const double bound = std::min(radius_left, radius_right);
      for (const auto& c : candidates)
        if (divergence(metric, c, center) >= bound + 1e-9)
          throw ValidationError("candidate leaves the divergence ball");
    }
  }
};

inline MatN confusion_matrix(std::size_t k, double noise) {
  if (noise < 0.0 || noise >= 1.0)
    throw ValidationError("confusion noise must lie in [0, 1)");
  MatN m(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      m(i, j) = (i == j) ? 1.0 - noise : (k > 1 ? noise / double(k - 1) : 0.0);
  return m;
}

// Generates K candidates by mixing the center with bell and double-peak
// perturbation shapes, with mixing weights bisected so the divergence to the
// center binds just below the radius.
inline TypeModel build_type_model(const Pdf1D& center, Divergence metric,
                                  double radius, std::size_t k, double noise,
                                  std::uint64_t seed = 12345) {
  if (k < 1) throw ValidationError("candidate count must be >= 1");
  if (radius <= 0.0) throw ValidationError("radius must be positive");
  if (!center.is_normalized()) throw ValidationError("center must be normalized");

  TypeModel tm;
  tm.metric = metric;
  tm.radius_left = tm.radius_right = radius;
  tm.center = center;
  tm.candidates.push_back(center);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double target = 0.8 * radius;
  int attempts = 0;
  while (tm.candidates.size() < k) {
    if (++attempts > 200)
      throw RadiusTooSmall("could not fit " + std::to_string(k) +
                           " candidates inside the divergence ball");
    Pdf1D shape;
    if (u01(rng) < 0.5) {
      shape = normalize_pdf(
          Pdf1D::bell(-0.5 + u01(rng), 0.25 + 0.45 * u01(rng), 0.0));
    } else {
      const double m = 0.2 + 0.4 * u01(rng);
      const double sg = 0.2 + 0.25 * u01(rng);
      shape = normalize_pdf(
          Pdf1D::gauss_shifted({{0.5, -m, sg}, {0.5, m, sg}}, 0.0));
    }
    const double lo_w = 1e-3;
    if (divergence(metric, mix_pdfs(center, shape, lo_w), center) >= radius)
      continue;  // this shape cannot enter the ball, try another
    double lo = lo_w, hi = 1.0;
    if (divergence(metric, mix_pdfs(center, shape, hi), center) < target) {
      lo = hi;  // even the pure shape stays below the target: take it all
    } else {
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (divergence(metric, mix_pdfs(center, shape, mid), center) < target)
          lo = mid;
        else
          hi = mid;
      }
    }
    tm.candidates.push_back(mix_pdfs(center, shape, lo));
  }

  tm.prior.assign(k, 1.0 / double(k));
  tm.likelihood_left = confusion_matrix(k, noise);
  tm.likelihood_right = confusion_matrix(k, noise);
  tm.validate();
  return tm;
}

// Bayes update of the common prior by the party's signal column.
inline std::vector<double> posterior(const TypeModel& tm, Side party,
                                     std::size_t signal) {
  const std::size_t k = tm.size();
  if (signal >= k) throw ValidationError("signal index out of range");
  const MatN& lik = (party == Side::Left) ? tm.likelihood_left : tm.likelihood_right;
  std::vector<double> post(k);
  double marginal = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    post[i] = tm.prior[i] * lik(i, signal);
    marginal += post[i];
  }
  if (marginal < 1e-300)
    throw ZeroEvidence("signal has zero marginal probability");
  for (auto& p : post) p /= marginal;
  return post;
}

struct BnePolicy {
  std::vector<double> x_left, x_right;    // strategy per received signal
  std::vector<double> eu_left, eu_right;  // expected utility per signal
  int rounds = 0;
  double deviation_slack = 0.0;  // worst improvement a unilateral deviation finds
};

namespace bnedetail {

struct Weights {
  // weight[i][j_opp] for the focal party: posterior of type i times the
  // opponent-signal likelihood given i
  std::vector<std::vector<double>> w;
};

inline Weights signal_weights(const TypeModel& tm, Side party, std::size_t signal) {
  const std::size_t k = tm.size();
  const auto post = posterior(tm, party, signal);
  const MatN& opp_lik =
      (party == Side::Left) ? tm.likelihood_right : tm.likelihood_left;
  Weights out;
  out.w.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) out.w[i][j] = post[i] * opp_lik(i, j);
  return out;
}

// expected own-utility of playing y against the opponent's signal-contingent
// policy, under the focal party's posterior
inline double expected_utility(const std::vector<Scenario1D>& typed, Side party,
                               const Weights& wt, double y,
                               const std::vector<double>& opponent) {
  double eu = 0.0;
  const std::size_t k = typed.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (wt.w[i][j] == 0.0) continue;
      const StrategyPair p = (party == Side::Left)
                                 ? StrategyPair{y, opponent[j]}
                                 : StrategyPair{opponent[j], y};
      const double share = turnout_integral(
          typed[i], (party == Side::Left) ? kSupportLo : p.mid(),
          (party == Side::Left) ? p.mid() : kSupportHi);
      eu += wt.w[i][j] * share;
    }
  const auto& d = (party == Side::Left) ? typed.front().d_left : typed.front().d_right;
  return eu - d.value(y);
}

inline double best_response(const std::vector<Scenario1D>& typed, Side party,
                            const Weights& wt, const std::vector<double>& opponent) {
  auto foc_own = [&](double y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < typed.size(); ++i)
      for (std::size_t j = 0; j < typed.size(); ++j) {
        if (wt.w[i][j] == 0.0) continue;
        const double mid = 0.5 * (y + opponent[j]);
        const double half_t = 0.5 * typed[i].turnout(mid);
        acc += wt.w[i][j] * ((party == Side::Left) ? half_t : -half_t);
      }
    const auto& d =
        (party == Side::Left) ? typed.front().d_left : typed.front().d_right;
    return acc - d.d1(y);
  };
  auto candidates =
      detail::slice_maximizer_candidates(foc_own, kSupportLo, kSupportHi);
  if (candidates.size() == 1) return candidates.front();
  return detail::pick_best_candidate(
      [&](double y) { return expected_utility(typed, party, wt, y, opponent); },
      candidates);
}

}  // namespace bnedetail

// Iterated signal-contingent best responses until the policy stops moving.
// The deterministic solver is the K = 1 special case; with a noiseless
// channel each signal's pair solves its type's complete-information game.
inline BnePolicy solve_bne(const TypeModel& tm, const Scenario1D& base,
                           int max_rounds = 1000) {
  tm.validate();
  base.validate();
  const std::size_t k = tm.size();
  std::vector<Scenario1D> typed;
  for (const auto& g : tm.candidates) {
    Scenario1D s = base;
    s.g = g;
    typed.push_back(std::move(s));
  }

  std::vector<bnedetail::Weights> wl, wr;
  for (std::size_t j = 0; j < k; ++j) {
    wl.push_back(bnedetail::signal_weights(tm, Side::Left, j));
    wr.push_back(bnedetail::signal_weights(tm, Side::Right, j));
  }

  auto iterate = [&](std::vector<double> xl, std::vector<double> xr, int& rounds) {
    for (rounds = 0; rounds < max_rounds; ++rounds) {
      double delta = 0.0;
      std::vector<double> nl(k), nr(k);
      for (std::size_t j = 0; j < k; ++j) {
        const double bl = bnedetail::best_response(typed, Side::Left, wl[j], xr);
        const double br = bnedetail::best_response(typed, Side::Right, wr[j], xl);
        nl[j] = xl[j] + 0.5 * (bl - xl[j]);
        nr[j] = xr[j] + 0.5 * (br - xr[j]);
        delta = std::max({delta, std::abs(nl[j] - xl[j]), std::abs(nr[j] - xr[j])});
      }
      xl = nl;
      xr = nr;
      if (delta < 1e-8) return std::make_pair(xl, xr);
    }
    throw NoConvergence("signal-contingent best responses did not settle");
  };

  int rounds = 0;
  auto [xl, xr] = iterate(std::vector<double>(k, base.d_left.ideal),
                          std::vector<double>(k, base.d_right.ideal), rounds);

  // second start from the per-type complete-information equilibria
  {
    std::vector<double> sl(k), sr(k);
    for (std::size_t j = 0; j < k; ++j) {
      SolveOptions opt;
      opt.run_certification = false;
      const auto eq = solve_nash(typed[j], opt);
      sl[j] = eq.pair.left;
      sr[j] = eq.pair.right;
    }
    int alt_rounds = 0;
    const auto [al, ar] = iterate(sl, sr, alt_rounds);
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(al[j] - xl[j]) > 1e-5 || std::abs(ar[j] - xr[j]) > 1e-5)
        throw NonUnique("multi-start Bayesian policies disagree");
  }

  BnePolicy policy;
  policy.x_left = xl;
  policy.x_right = xr;
  policy.rounds = rounds;
  policy.eu_left.resize(k);
  policy.eu_right.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    policy.eu_left[j] =
        bnedetail::expected_utility(typed, Side::Left, wl[j], xl[j], xr);
    policy.eu_right[j] =
        bnedetail::expected_utility(typed, Side::Right, wr[j], xr[j], xl);
    const double bl = bnedetail::best_response(typed, Side::Left, wl[j], xr);
    const double br = bnedetail::best_response(typed, Side::Right, wr[j], xl);
    const double gain_l =
        bnedetail::expected_utility(typed, Side::Left, wl[j], bl, xr) -
        policy.eu_left[j];
    const double gain_r =
        bnedetail::expected_utility(typed, Side::Right, wr[j], br, xl) -
        policy.eu_right[j];
    policy.deviation_slack = std::max({policy.deviation_slack, gain_l, gain_r});
  }
  return policy;
}

// ex-ante expected utilities of a policy, averaging over types and both
// parties' signal channels
inline std::array<double, 2> expected_policy_value(const TypeModel& tm,
                                                   const Scenario1D& base,
                                                   const BnePolicy& policy) {
  const std::size_t k = tm.size();
  std::array<double, 2> value{0.0, 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    Scenario1D s = base;
    s.g = tm.candidates[i];
    for (std::size_t jl = 0; jl < k; ++jl)
      for (std::size_t jr = 0; jr < k; ++jr) {
        const double w = tm.prior[i] * tm.likelihood_left(i, jl) *
                         tm.likelihood_right(i, jr);
        if (w == 0.0) continue;
        const StrategyPair p{policy.x_left[jl], policy.x_right[jr]};
        value[0] += w * utility_left(s, p);
        value[1] += w * utility_right(s, p);
      }
  }
  return value;
}

}  // namespace polequil
