#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "polequil/errors.hpp"
#include "polequil/quadrature.hpp"

namespace polequil {

constexpr double kSupportLo = -1.0;
constexpr double kSupportHi = 1.0;

enum class PdfKind { GaussShifted, Mixture, Tabulated, Combination };

struct GaussComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sigma = 1.0;
};

// One-dimensional voter density on [-1, 1]. The catalog is closed so scenario
// files stay serializable and derivatives stay analytic:
//   gauss-shifted : sum_i w_i exp(-(x-mu_i)^2 / (2 sigma_i^2)) - offset
//   mixture       : (1-lambda) a(x) + lambda b(x), a and b normalized
//   tabulated     : linear interpolation of grid samples
//   combination   : signed affine combination of normalized pdfs with
//                   coefficients summing to 1 (used for perturbed densities)
// Raw specs are built by the factories and must pass through normalize_pdf()
// before evaluation; the recorded normalizer divides the raw density.
class Pdf1D {
 public:
  Pdf1D() = default;

  static Pdf1D gauss_shifted(std::vector<GaussComponent> components, double offset) {
    Pdf1D p;
    p.kind_ = PdfKind::GaussShifted;
    p.components_ = std::move(components);
    p.offset_ = offset;
    return p;
  }

  static Pdf1D bell(double mean, double sigma, double offset) {
    return gauss_shifted({{1.0, mean, sigma}}, offset);
  }

  static Pdf1D tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
      throw ValidationError("tabulated pdf needs matching xs/ys with >= 2 knots");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (xs[i] <= xs[i - 1]) throw ValidationError("tabulated pdf knots must ascend");
    Pdf1D p;
    p.kind_ = PdfKind::Tabulated;
    p.xs_ = std::move(xs);
    p.ys_ = std::move(ys);
    return p;
  }

  static Pdf1D combination(std::vector<std::pair<double, Pdf1D>> terms) {
    double total = 0.0;
    Pdf1D p;
    p.kind_ = PdfKind::Combination;
    for (auto& [coef, pdf] : terms) {
      if (!pdf.is_normalized())
        throw ValidationError("combination terms must be normalized");
      total += coef;
      p.terms_.push_back({coef, std::make_shared<const Pdf1D>(std::move(pdf))});
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw NotZeroMass("combination coefficients must sum to 1");
    p.check_nonnegative_normalized();
    p.normalizer_ = 1.0;
    return p;
  }

  PdfKind kind() const { return kind_; }
  bool is_normalized() const { return normalizer_ > 0.0; }
  double normalizer() const { return normalizer_; }
  double mixture_lambda() const { return lambda_; }

  double raw_value(double x) const {
    switch (kind_) {
      case PdfKind::GaussShifted: {
        double v = -offset_;
        for (const auto& c : components_)
          v += c.weight * std::exp(-0.5 * sq((x - c.mean) / c.sigma));
        return v;
      }
      case PdfKind::Mixture:
        return (1.0 - lambda_) * first_->value(x) + lambda_ * second_->value(x);
      case PdfKind::Tabulated: {
        if (x < xs_.front() || x > xs_.back()) return 0.0;  // zero off the knots
        const auto [i, t] = locate(x);
        return ys_[i] + t * (ys_[i + 1] - ys_[i]);
      }
      case PdfKind::Combination: {
        double v = 0.0;
        for (const auto& [coef, pdf] : terms_) v += coef * pdf->value(x);
        return v;
      }
    }
    return 0.0;
  }

  double raw_deriv(double x) const {
    switch (kind_) {
      case PdfKind::GaussShifted: {
        double v = 0.0;
        for (const auto& c : components_) {
          const double z = (x - c.mean) / c.sigma;
          v += -c.weight * z / c.sigma * std::exp(-0.5 * z * z);
        }
        return v;
      }
      case PdfKind::Mixture:
        return (1.0 - lambda_) * first_->deriv(x) + lambda_ * second_->deriv(x);
      case PdfKind::Tabulated: {
        if (x < xs_.front() || x > xs_.back()) return 0.0;
        const auto [i, t] = locate(x);
        (void)t;
        return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
      }
      case PdfKind::Combination: {
        double v = 0.0;
        for (const auto& [coef, pdf] : terms_) v += coef * pdf->deriv(x);
        return v;
      }
    }
    return 0.0;
  }

  // Normalized density. Requires a prior normalize_pdf().
  double value(double x) const {
    require_support(x);
    require_normalized();
    return raw_value(x) / normalizer_;
  }

  double deriv(double x) const {
    require_support(x);
    require_normalized();
    return raw_deriv(x) / normalizer_;
  }

  friend Pdf1D normalize_pdf(Pdf1D spec);
  friend Pdf1D mix_pdfs(const Pdf1D& a, const Pdf1D& b, double lambda);

 private:
  static double sq(double v) { return v * v; }

  std::pair<std::size_t, double> locate(double x) const {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = (it == xs_.begin()) ? 0 : std::size_t(it - xs_.begin()) - 1;
    i = std::min(i, xs_.size() - 2);
    return {i, (x - xs_[i]) / (xs_[i + 1] - xs_[i])};
  }

  static void require_support(double x) {
    if (x < kSupportLo - 1e-12 || x > kSupportHi + 1e-12)
      throw OutOfSupport("ideology coordinate outside [-1, 1]");
  }

  void require_normalized() const {
    if (!is_normalized()) throw ValidationError("pdf used before normalize_pdf()");
  }

  double raw_mass() const {
    if (kind_ == PdfKind::Tabulated) {
      // exact for a piecewise-linear density
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        s += 0.5 * (ys_[i] + ys_[i + 1]) * (xs_[i + 1] - xs_[i]);
      return s;
    }
    return integrate([this](double x) { return raw_value(x); }, kSupportLo,
                     kSupportHi, 32, 1.0 / 64.0);
  }

  void check_nonnegative_normalized() const {
    constexpr int kGrid = 2001;
    for (int i = 0; i < kGrid; ++i) {
      const double x = kSupportLo + (kSupportHi - kSupportLo) * i / (kGrid - 1);
      double v = 0.0;
      for (const auto& [coef, pdf] : terms_) v += coef * pdf->value(x);
      if (v < -1e-12)
        throw NegativeDensity("combination density negative at x=" + std::to_string(x));
    }
  }

  PdfKind kind_ = PdfKind::GaussShifted;
  std::vector<GaussComponent> components_;
  double offset_ = 0.0;
  std::shared_ptr<const Pdf1D> first_, second_;
  double lambda_ = 0.0;
  std::vector<double> xs_, ys_;
  std::vector<std::pair<double, std::shared_ptr<const Pdf1D>>> terms_;
  double normalizer_ = 0.0;  // 0 marks an unnormalized spec
};

// Recomputes the normalizer numerically; published reference constants are
// treated as checks, never as inputs.
inline Pdf1D normalize_pdf(Pdf1D spec) {
  if (spec.kind_ == PdfKind::Mixture || spec.kind_ == PdfKind::Combination) {
    spec.normalizer_ = 1.0;  // children already integrate to 1
    return spec;
  }
  constexpr int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) {
    const double x = kSupportLo + (kSupportHi - kSupportLo) * i / (kGrid - 1);
    if (spec.raw_value(x) < -1e-12)
      throw NegativeDensity("raw density negative at x=" + std::to_string(x));
  }
  const double mass = spec.raw_mass();
  if (mass < 1e-12) throw ZeroMass("raw density integrates to ~0");
  spec.normalizer_ = mass;
  return spec;
}

inline double eval_pdf(const Pdf1D& spec, double x) { return spec.value(x); }

inline Pdf1D mix_pdfs(const Pdf1D& a, const Pdf1D& b, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw BadLambda("mixture weight must lie in [0, 1]");
  if (!a.is_normalized() || !b.is_normalized())
    throw ValidationError("mix_pdfs needs normalized inputs");
  if (lambda == 0.0) return a;
  if (lambda == 1.0) return b;
  Pdf1D p;
  p.kind_ = PdfKind::Mixture;
  p.first_ = std::make_shared<const Pdf1D>(a);
  p.second_ = std::make_shared<const Pdf1D>(b);
  p.lambda_ = lambda;
  p.normalizer_ = 1.0;
  return p;
}

// --- voting-cost CDF ---

enum class CostCdfKind { AffineClamped, IdentityClamped };

// F_c clamps to [0, 1] even when configured as a plain affine form: it is a
// CDF, and the derivative vanishes on the clamped branches.
struct CostCdf {
  CostCdfKind kind = CostCdfKind::AffineClamped;
  double slope = 1.0;
  double intercept = 0.0;

  static CostCdf affine(double slope, double intercept = 0.0) {
    return {CostCdfKind::AffineClamped, slope, intercept};
  }
  static CostCdf identity() { return {CostCdfKind::IdentityClamped, 1.0, 0.0}; }

  double value(double v) const {
    return std::clamp(slope * v + intercept, 0.0, 1.0);
  }
  double deriv(double v) const {
    const double raw = slope * v + intercept;
    return (raw > 0.0 && raw < 1.0) ? slope : 0.0;
  }
};

inline double eval_cost_cdf(const CostCdf& spec, double v) { return spec.value(v); }

// --- voting motivation ---

// Polynomial in ascending coefficient order: m(x) = sum_i coeffs[i] x^i.
struct Motivation {
  std::vector<double> coeffs;

  double value(double x) const {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
    return v;
  }
  double deriv(double x) const {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 1;) v = v * x + coeffs[i] * double(i);
    return v;
  }
  double second(double x) const {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 2;)
      v = v * x + coeffs[i] * double(i) * double(i - 1);
    return v;
  }
  bool convex_on_support(int samples = 512) const {
    for (int i = 0; i <= samples; ++i) {
      const double x = kSupportLo + (kSupportHi - kSupportLo) * i / samples;
      if (second(x) < -1e-12) return false;
    }
    return true;
  }
};

// --- ideal-deviation cost ---

// D(x) = k (x - ideal)^2: zero with zero slope at the ideal point, curvature 2k.
struct DeviationCost {
  double k = 0.0;
  double ideal = 0.0;

  double value(double x) const { return k * (x - ideal) * (x - ideal); }
  double d1(double x) const { return 2.0 * k * (x - ideal); }
  double d2() const { return 2.0 * k; }
};

struct DeviationEval {
  double value;
  double first;
  double second;
};

inline DeviationEval eval_deviation(const DeviationCost& spec, double x) {
  return {spec.value(x), spec.d1(x), spec.d2()};
}

// --- policy feasibility cost ---

// Linear form scale * <gradient, x>; the gradient sign pattern is free so any
// tax/welfare orientation can be configured.
struct Feasibility {
  std::vector<double> gradient;
  double scale = 1.0;

  static Feasibility none(std::size_t dim) {
    return {std::vector<double>(dim, 0.0), 1.0};
  }

  bool is_zero() const {
    for (double g : gradient)
      if (g != 0.0) return false;
    return true;
  }

  double value(const std::vector<double>& x) const {
    if (x.size() != gradient.size())
      throw DimensionMismatch("feasibility gradient dimension mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += gradient[i] * x[i];
    return scale * v;
  }

  std::vector<double> grad() const {
    std::vector<double> g(gradient.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * gradient[i];
    return g;
  }
};

struct FeasibilityEval {
  double value;
  std::vector<double> gradient;
};

inline FeasibilityEval eval_feasibility(const Feasibility& spec,
                                        const std::vector<double>& x) {
  return {spec.value(x), spec.grad()};
}

}  // namespace polequil
