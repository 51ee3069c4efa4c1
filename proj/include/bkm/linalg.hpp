#pragma once

// Dense real linear algebra: LU with partial pivoting, solves, and a Hager /
// Higham 1-norm condition estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bkm/errors.hpp"

namespace bkm::linalg {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const { return data_; }

  Vector operator*(std::span<const double> x) const {
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto r = row(i);
      y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
    }
    return y;
  }

  DenseMatrix operator*(const DenseMatrix& b) const {
    DenseMatrix c(rows_, b.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a * b(k, j);
      }
    return c;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Max absolute row sum.
  double norm_inf() const {
    double n = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (double v : row(i)) s += std::abs(v);
      n = std::max(n, s);
    }
    return n;
  }

  /// Max absolute column sum.
  double norm_1() const {
    Vector col(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) col[j] += std::abs((*this)(i, j));
    return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double norm_inf(std::span<const double> v) {
  double n = 0.0;
  for (double x : v) n = std::max(n, std::abs(x));
  return n;
}

inline constexpr double kPivotFloor = 1e-300;
inline constexpr double kNearSingularCondition = 1e14;

/// PA = LU with partial pivoting; L unit lower triangular, both factors
/// packed into one matrix.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a) : lu_(std::move(a)), norm1_(lu_.norm_1()) {
    if (!lu_.square()) throw DomainError("LU: matrix must be square");
    if (!lu_.all_finite()) throw DomainError("LU: matrix has non-finite entries");
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      if (best < kPivotFloor)
        throw SingularMatrixError("LU: pivot " + std::to_string(best) + " at column " +
                                  std::to_string(k));
      if (p != k) {
        std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
        std::swap(perm_[k], perm_[p]);
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }
  /// perm[i] is the original row placed at row i.
  const std::vector<std::size_t>& permutation() const { return perm_; }

  DenseMatrix lower() const {
    DenseMatrix l = DenseMatrix::identity(size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < i; ++j) l(i, j) = lu_(i, j);
    return l;
  }

  DenseMatrix upper() const {
    DenseMatrix u(size(), size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i; j < size(); ++j) u(i, j) = lu_(i, j);
    return u;
  }

  Vector solve(std::span<const double> b) const {
    const std::size_t n = size();
    if (b.size() != n) throw DomainError("LU solve: right-hand side length mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  /// Solves A^T x = b.
  Vector solve_transposed(std::span<const double> b) const {
    const std::size_t n = size();
    Vector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(j, i) * y[j];
      y[i] /= lu_(i, i);
    }
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = i + 1; j < n; ++j) y[i] -= lu_(j, i) * y[j];
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
    return x;
  }

  /// Estimate of ||A||_1 ||A^{-1}||_1 (Hager's method with Higham's
  /// alternating-sign safeguard).
  double condition_estimate() const {
    const std::size_t n = size();
    if (n == 0) return 1.0;
    Vector x(n, 1.0 / n);
    double estimate = 0.0;
    std::size_t last = n;
    for (int iter = 0; iter < 5; ++iter) {
      const Vector y = solve(x);
      double y1 = 0.0;
      for (double v : y) y1 += std::abs(v);
      estimate = std::max(estimate, y1);
      Vector xi(n);
      for (std::size_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      const Vector z = solve_transposed(xi);
      std::size_t j = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (std::abs(z[i]) > std::abs(z[j])) j = i;
      const double ztx = std::inner_product(z.begin(), z.end(), x.begin(), 0.0);
      if (std::abs(z[j]) <= ztx || j == last) break;
      std::fill(x.begin(), x.end(), 0.0);
      x[j] = 1.0;
      last = j;
    }
    Vector alt(n);
    for (std::size_t i = 0; i < n; ++i)
      alt[i] = (i % 2 ? -1.0 : 1.0) * (1.0 + (n > 1 ? double(i) / double(n - 1) : 0.0));
    const Vector w = solve(alt);
    double w1 = 0.0;
    for (double v : w) w1 += std::abs(v);
    estimate = std::max(estimate, 2.0 * w1 / (3.0 * n));
    return std::max(1.0, norm1_ * estimate);
  }

 private:
  DenseMatrix lu_;
  double norm1_;
  std::vector<std::size_t> perm_;
};

/// Side channel for solve diagnostics.
struct SolveDiagnostics {
  double condition = 1.0;
  bool near_singular = false;
};

inline Vector lu_solve(const DenseMatrix& a, std::span<const double> b,
                       SolveDiagnostics* diagnostics = nullptr) {
  if (!a.square()) throw DomainError("lu_solve: matrix must be square");
  if (b.size() != a.rows()) throw DomainError("lu_solve: right-hand side length mismatch");
  const LuFactorization lu(a);
  Vector x = lu.solve(b);
  if (diagnostics) {
    diagnostics->condition = lu.condition_estimate();
    diagnostics->near_singular = diagnostics->condition > kNearSingularCondition;
  }
  return x;
}

inline double condition_estimate(const DenseMatrix& a) {
  return LuFactorization(a).condition_estimate();
}

/// Tikhonov-regularised solve: minimises ||Ax - b||^2 + lambda^2 ||x||^2 as
/// the least-squares problem [A; lambda I] x = [b; 0], by Householder QR.
/// The reported condition is that of the stacked matrix's R factor.
inline Vector tikhonov_solve(const DenseMatrix& a, std::span<const double> b, double lambda,
                             SolveDiagnostics* diagnostics = nullptr) {
  if (b.size() != a.rows()) throw DomainError("tikhonov_solve: right-hand side length mismatch");
  if (!(lambda >= 0.0)) throw DomainError("tikhonov_solve: lambda must be >= 0");
  const std::size_t m = a.rows(), n = a.cols(), rows = m + n;
  DenseMatrix w(rows, n);
  Vector y(rows, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) w(i, j) = a(i, j);
    y[i] = b[i];
  }
  for (std::size_t j = 0; j < n; ++j) w(m + j, j) = lambda;
  if (!w.all_finite()) throw DomainError("tikhonov_solve: matrix has non-finite entries");

  Vector v(rows);
  for (std::size_t k = 0; k < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k; i < rows; ++i) alpha += w(i, k) * w(i, k);
    alpha = std::sqrt(alpha);
    if (alpha < kPivotFloor) throw SingularMatrixError("tikhonov_solve: rank deficient at column " + std::to_string(k));
    if (w(k, k) > 0.0) alpha = -alpha;
    for (std::size_t i = k; i < rows; ++i) v[i] = w(i, k);
    v[k] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k; i < rows; ++i) vv += v[i] * v[i];
    if (vv > 0.0) {
      for (std::size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < rows; ++i) s += v[i] * w(i, j);
        s *= 2.0 / vv;
        for (std::size_t i = k; i < rows; ++i) w(i, j) -= s * v[i];
      }
      double s = 0.0;
      for (std::size_t i = k; i < rows; ++i) s += v[i] * y[i];
      s *= 2.0 / vv;
      for (std::size_t i = k; i < rows; ++i) y[i] -= s * v[i];
    }
  }
  DenseMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = w(i, j);
  Vector x(y.begin(), y.begin() + n);
  return lu_solve(r, x, diagnostics);
}

}  // namespace bkm::linalg
