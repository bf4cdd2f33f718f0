#pragma once

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix. The sparsity pattern is fixed once built;
// add() accumulates into existing entries only.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Duplicate (row, col) pairs are summed; explicit zeros are kept so a
  // pattern can be assembled once from zero-valued triplets.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets)
      NSROM_REQUIRE(t.row < rows && t.col < cols, "SparseMatrix: triplet index out of range");
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_offsets_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const Triplet& t = triplets[k];
      if (!m.col_indices_.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
        m.values_.back() += t.value;
        continue;
      }
      m.col_indices_.push_back(t.col);
      m.values_.push_back(t.value);
      ++m.row_offsets_[t.row + 1];
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];
    return m;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  std::span<const std::size_t> row_columns(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<double> row_values(std::size_t i) {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  // Position of (i, j) in values(), or npos when outside the pattern.
  std::size_t find(std::size_t i, std::size_t j) const {
    const auto cols = row_columns(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return npos;
    return row_offsets_[i] + static_cast<std::size_t>(it - cols.begin());
  }

  double value(std::size_t i, std::size_t j) const {
    const std::size_t k = find(i, j);
    return k == npos ? 0.0 : values_[k];
  }

  void add(std::size_t i, std::size_t j, double v) {
    const std::size_t k = find(i, j);
    if (k == npos)
      throw PreconditionError("SparseMatrix::add: (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside sparsity pattern");
    values_[k] += v;
  }

  void set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

  Vector multiply(std::span<const double> x) const {
    NSROM_REQUIRE(x.size() == cols_, "SparseMatrix::multiply: size mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[col_indices_[k]];
      y[i] = s;
    }
    return y;
  }

  Vector multiply_transpose(std::span<const double> x) const {
    NSROM_REQUIRE(x.size() == rows_, "SparseMatrix::multiply_transpose: size mismatch");
    Vector y(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) y[col_indices_[k]] += values_[k] * x[i];
    return y;
  }

  SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) t.push_back({col_indices_[k], i, values_[k]});
    return from_triplets(cols_, rows_, std::move(t));
  }

  // x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const { return dot(x, multiply(y)); }

  double frobenius_norm() const { return norm2(values_); }

  double max_abs_row_sum() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (double v : row_values(i)) s += std::abs(v);
      m = std::max(m, s);
    }
    return m;
  }

  // max |A_ij - A_ji| over the union of both patterns.
  double max_asymmetry() const {
    NSROM_REQUIRE(rows_ == cols_, "max_asymmetry: matrix not square");
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        m = std::max(m, std::abs(values_[k] - value(col_indices_[k], i)));
    return m;
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  Vector values_;
};

// Sparse direct LU (UMFPACK: fill-reducing ordering + threshold partial
// pivoting). analyze() fixes the pattern; factorize() may be called again
// for new values on the same pattern. Not shareable between threads.
class SparseLU {
 public:
  SparseLU() {
    umfpack_di_defaults(control_);
    // FE systems here are structurally symmetric.
    control_[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  }
  explicit SparseLU(const SparseMatrix& m) : SparseLU() {
    analyze(m);
    factorize(m);
  }
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  SparseLU(SparseLU&& o) noexcept { *this = std::move(o); }
  SparseLU& operator=(SparseLU&& o) noexcept {
    if (this != &o) {
      release();
      std::copy(std::begin(o.control_), std::end(o.control_), std::begin(control_));
      n_ = o.n_;
      offsets_ = std::move(o.offsets_);
      indices_ = std::move(o.indices_);
      values_ = std::move(o.values_);
      symbolic_ = std::exchange(o.symbolic_, nullptr);
      numeric_ = std::exchange(o.numeric_, nullptr);
    }
    return *this;
  }
  ~SparseLU() { release(); }

  void analyze(const SparseMatrix& m) {
    NSROM_REQUIRE(m.rows() == m.cols(), "solve_sparse: matrix not square");
    release();
    n_ = m.rows();
    copy_pattern(m);
    // The CSR arrays of A are the CSC arrays of A^T; UMFPACK factors A^T and
    // solves with the transposed system flag.
    const int status = umfpack_di_symbolic(static_cast<int>(n_), static_cast<int>(n_), offsets_.data(),
                                           indices_.data(), values_.data(), &symbolic_, control_, nullptr);
    if (status != UMFPACK_OK) throw SolverError("solve_sparse: symbolic analysis failed (UMFPACK status " +
                                                std::to_string(status) + ")");
  }

  void factorize(const SparseMatrix& m) {
    if (symbolic_ == nullptr) analyze(m);
    NSROM_REQUIRE(m.rows() == n_ && m.nonzeros() == indices_.size(), "solve_sparse: pattern changed since analyze()");
    values_.assign(m.values().begin(), m.values().end());
    if (numeric_ != nullptr) {
      umfpack_di_free_numeric(&numeric_);
      numeric_ = nullptr;
    }
    double info[UMFPACK_INFO];
    const int status = umfpack_di_numeric(offsets_.data(), indices_.data(), values_.data(), symbolic_, &numeric_,
                                          control_, info);
    if (status == UMFPACK_WARNING_singular_matrix) throw SolverError(singular_message());
    if (status != UMFPACK_OK)
      throw SolverError("solve_sparse: numeric factorization failed (UMFPACK status " + std::to_string(status) + ")");
  }

  Vector solve(std::span<const double> rhs) const {
    NSROM_REQUIRE(numeric_ != nullptr, "SparseLU::solve before factorize");
    NSROM_REQUIRE(rhs.size() == n_, "SparseLU::solve: size mismatch");
    Vector x(n_, 0.0);
    const int status = umfpack_di_solve(UMFPACK_At, offsets_.data(), indices_.data(), values_.data(), x.data(),
                                        rhs.data(), numeric_, control_, nullptr);
    if (status == UMFPACK_WARNING_singular_matrix) throw SolverError(singular_message());
    if (status != UMFPACK_OK) throw SolverError("solve_sparse: solve failed (UMFPACK status " + std::to_string(status) + ")");
    return x;
  }

 private:
  void copy_pattern(const SparseMatrix& m) {
    if (m.nonzeros() > static_cast<std::size_t>(std::numeric_limits<int>::max()))
      throw PreconditionError("solve_sparse: matrix too large for 32-bit indices");
    offsets_.assign(m.row_offsets().begin(), m.row_offsets().end());
    indices_.assign(m.col_indices().begin(), m.col_indices().end());
    values_.assign(m.values().begin(), m.values().end());
  }

  // Locate the first zero pivot so the message can name the unknown.
  std::string singular_message() const {
    std::string msg = "solve_sparse: matrix is singular";
    if (numeric_ == nullptr) return msg;
    int lnz = 0, unz = 0, nr = 0, nc = 0, nz_udiag = 0;
    if (umfpack_di_get_lunz(&lnz, &unz, &nr, &nc, &nz_udiag, numeric_) != UMFPACK_OK) return msg;
    std::vector<int> p(n_), q(n_);
    Vector dx(n_);
    int do_recip = 0;
    if (umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, p.data(), q.data(),
                               dx.data(), &do_recip, nullptr, numeric_) != UMFPACK_OK)
      return msg;
    for (std::size_t k = 0; k < n_; ++k)
      if (dx[k] == 0.0 || !std::isfinite(dx[k]))
        // Columns of the factored A^T are rows of A.
        return msg + ": zero pivot at row " + std::to_string(q[k]) +
               " (missing pressure constraint or disconnected mesh?)";
    return msg;
  }

  void release() noexcept {
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    if (symbolic_ != nullptr) umfpack_di_free_symbolic(&symbolic_);
    numeric_ = nullptr;
    symbolic_ = nullptr;
  }

  double control_[UMFPACK_CONTROL];
  std::size_t n_ = 0;
  std::vector<int> offsets_;
  std::vector<int> indices_;
  Vector values_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
};

inline Vector solve_sparse(const SparseMatrix& m, std::span<const double> rhs) {
  SparseLU lu(m);
  return lu.solve(rhs);
}

}  // namespace nsrom
