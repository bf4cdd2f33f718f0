#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  std::span<const double> data() const noexcept { return values_; }
  std::span<double> data() noexcept { return values_; }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Vector multiply(std::span<const double> x) const {
    NSROM_REQUIRE(x.size() == cols_, "DenseMatrix::multiply: size mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
    return y;
  }

  double frobenius_norm() const { return norm2(values_); }

  double max_asymmetry() const {
    NSROM_REQUIRE(is_square(), "max_asymmetry: matrix not square");
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector values_;
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  NSROM_REQUIRE(a.cols() == b.rows(), "matrix product: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// LU factorization with partial pivoting for the small systems of the ROM.
class DenseLU {
 public:
  explicit DenseLU(DenseMatrix a) : lu_(std::move(a)), pivots_(lu_.rows()) {
    NSROM_REQUIRE(lu_.is_square(), "DenseLU: matrix not square");
    const std::size_t n = lu_.rows();
    const double scale = std::max(lu_.frobenius_norm(), std::numeric_limits<double>::min());
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
      if (std::abs(lu_(piv, k)) <= 1e-300 * scale || !std::isfinite(lu_(piv, k)))
        throw SolverError("DenseLU: singular matrix, zero pivot in column " + std::to_string(k));
      pivots_[k] = piv;
      if (piv != k)
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      const double inv = 1.0 / lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = (lu_(i, k) *= inv);
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  Vector solve(std::span<const double> rhs) const {
    const std::size_t n = lu_.rows();
    NSROM_REQUIRE(rhs.size() == n, "DenseLU::solve: size mismatch");
    Vector x(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[pivots_[k]]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> pivots_;
};

inline Vector dense_solve(const DenseMatrix& a, std::span<const double> rhs) {
  return DenseLU(a).solve(rhs);
}

// Eigenpairs of a symmetric matrix. values are descending; column k of
// vectors is the eigenvector for values[k].
struct SymEig {
  Vector values;
  DenseMatrix vectors;
};

namespace detail {

// Flip each column so that its entry of largest magnitude is positive
// (first such entry on ties).
inline void normalize_column_signs(DenseMatrix& v, std::span<double> companion_signs = {}) {
  for (std::size_t k = 0; k < v.cols(); ++k) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.rows(); ++i)
      if (std::abs(v(i, k)) > std::abs(v(arg, k))) arg = i;
    const bool flip = v.rows() > 0 && v(arg, k) < 0.0;
    if (flip)
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, k) = -v(i, k);
    if (!companion_signs.empty()) companion_signs[k] = flip ? -1.0 : 1.0;
  }
}

// Householder reduction to tridiagonal form; v holds the accumulated
// orthogonal transformation on exit, d the diagonal, e the subdiagonal
// (e[0] unused).
inline void tridiagonalize(DenseMatrix& v, Vector& d, Vector& e) {
  const int n = static_cast<int>(v.rows());
  for (int j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (int i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (int k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (int j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (int k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (int j = 0; j < i; ++j) e[j] = 0.0;

      for (int j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (int k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (int j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (int j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (int k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (int i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (int k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (int j = 0; j <= i; ++j) {
        double g = 0.0;
        for (int k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (int k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (int k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (int j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL iteration on the tridiagonal (d, e), accumulating into v.
inline void tridiagonal_ql(DenseMatrix& v, Vector& d, Vector& e) {
  const int n = static_cast<int>(v.rows());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const int max_iter = 30 * std::max(n, 1);
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    int m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > max_iter)
          throw SolverError("sym_eig: QL iteration did not converge after " +
                            std::to_string(max_iter) + " iterations (eigenvalue " +
                            std::to_string(l) + ")");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (int k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace detail

// Symmetric eigendecomposition: Householder tridiagonalization followed by
// implicit QL. Throws PreconditionError for non-square or asymmetric input.
inline SymEig sym_eig(const DenseMatrix& m) {
  NSROM_REQUIRE(m.is_square(), "sym_eig: matrix is not square");
  const std::size_t n = m.rows();
  const double scale = m.frobenius_norm();
  if (m.max_asymmetry() > 1e-12 * std::max(scale, std::numeric_limits<double>::min()))
    throw PreconditionError("sym_eig: matrix is not symmetric");
  if (n == 0) return {};

  DenseMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) v(i, j) = v(j, i) = 0.5 * (m(i, j) + m(j, i));
  Vector d(n), e(n);
  detail::tridiagonalize(v, d, e);
  detail::tridiagonal_ql(v, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

  SymEig out{Vector(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  detail::normalize_column_signs(out.vectors);
  return out;
}

// Thin singular value decomposition a = U diag(values) V^T.
struct Svd {
  Vector values;     // descending, nonnegative
  DenseMatrix left;  // rows(a) x cols(a); zero columns where values[k] == 0
  DenseMatrix right; // cols(a) x cols(a), orthogonal
};

// One-sided (Hestenes) Jacobi SVD. Requires rows >= cols. The right
// singular vectors follow the same sign rule as sym_eig, so they coincide
// with the eigenvectors of a^T a.
inline Svd jacobi_svd(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  NSROM_REQUIRE(m >= n, "jacobi_svd: needs rows >= cols");

  std::vector<Vector> u(n, Vector(m));
  std::vector<Vector> v(n, Vector(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) u[j][i] = a(i, j);
    v[j][j] = 1.0;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_sweeps = 80;
  int sweep = 0;
  for (bool rotated = true; rotated; ++sweep) {
    if (sweep >= max_sweeps)
      throw SolverError("jacobi_svd: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(u[p], u[p]);
        const double beta = dot(u[q], u[q]);
        const double gamma = dot(u[p], u[q]);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u[p][i], uq = u[q][i];
          u[p][i] = c * up - s * uq;
          u[q][i] = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i], vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(u[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Svd out{Vector(n), DenseMatrix(m, n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.values[k] = sigma[j];
    const double inv = sigma[j] > 0.0 ? 1.0 / sigma[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) out.left(i, k) = u[j][i] * inv;
    for (std::size_t i = 0; i < n; ++i) out.right(i, k) = v[j][i];
  }
  Vector signs(n, 1.0);
  detail::normalize_column_signs(out.right, signs);
  for (std::size_t k = 0; k < n; ++k)
    if (signs[k] < 0)
      for (std::size_t i = 0; i < m; ++i) out.left(i, k) = -out.left(i, k);
  return out;
}

}  // namespace nsrom
