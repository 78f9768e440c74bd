#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "polequil/errors.hpp"

namespace polequil {

struct Mat2 {
  // row-major: [a b; c d]
  double a = 0, b = 0, c = 0, d = 0;
  double det() const { return a * d - b * c; }
};

// Solves [a b; c d] x = rhs by Cramer's rule. Throws SingularBlock when the
// determinant is below tol.
inline std::array<double, 2> solve2(const Mat2& m, const std::array<double, 2>& rhs,
                                    double tol = 1e-14) {
  const double det = m.det();
  if (std::abs(det) < tol) throw SingularBlock("2x2 system is singular");
  return {(rhs[0] * m.d - rhs[1] * m.b) / det, (m.a * rhs[1] - m.c * rhs[0]) / det};
}

// Small dense row-major matrix; the library never needs more than 6x6
// (stacked gradients of a 3-D two-party game).
class MatN {
 public:
  MatN() = default;
  MatN(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double norm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

struct LuResult {
  std::vector<double> solution;
  double det = 0.0;
};

// Gaussian elimination with partial pivoting. Throws SingularBlock when a
// pivot falls below tol relative to the matrix scale.
inline LuResult lu_solve(MatN m, std::vector<double> rhs, double tol = 1e-13) {
  const std::size_t n = m.rows();
  if (m.cols() != n || rhs.size() != n)
    throw DimensionMismatch("lu_solve needs a square system");
  const double scale = std::max(m.norm1(), 1e-300);
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (std::abs(m(piv, k)) < tol * scale)
      throw SingularBlock("pivot below tolerance in lu_solve");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(rhs[k], rhs[piv]);
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      m(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = rhs[ri];
    for (std::size_t j = ri + 1; j < n; ++j) s -= m(ri, j) * x[j];
    x[ri] = s / m(ri, ri);
  }
  return {std::move(x), det};
}

inline MatN invert(const MatN& m) {
  const std::size_t n = m.rows();
  MatN inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    auto col = lu_solve(m, e).solution;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

// 1-norm condition number via the explicit inverse; fine at these sizes.
inline double cond1(const MatN& m) {
  return m.norm1() * invert(m).norm1();
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace polequil
