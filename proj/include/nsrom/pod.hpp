#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/fem/assembly.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/numerics/dense.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "nsrom/numerics/vector.hpp"
#include "nsrom/snapshots.hpp"

namespace nsrom {

enum class Centering { none, mean };

inline std::string to_string(Centering c) { return c == Centering::mean ? "mean" : "none"; }

inline Centering parse_centering(std::string_view s) {
  if (s == "none") return Centering::none;
  if (s == "mean") return Centering::mean;
  throw ConfigError("unknown centering '" + std::string(s) + "' (expected none or mean)");
}

struct PodOptions {
  Centering centering = Centering::none;
  // Modes with lambda_k <= rank_cutoff * lambda_1 are dropped.
  double rank_cutoff = 1e-12;
};

struct PodBasis {
  std::vector<Vector> modes;       // psi_1 .. psi_d
  std::vector<Vector> mass_modes;  // M psi_k, for projections
  Vector eigenvalues;              // descending
  Vector grad_norms;               // ||grad psi_k||
  Vector mean;                     // empty unless centered
  Centering centering = Centering::none;
  std::size_t snapshot_count = 0;
  // sum of ||grad psi_k||^2 lambda_k over the directions below the cutoff
  double tail = 0.0;

  std::size_t rank() const noexcept { return modes.size(); }
  std::size_t dofs() const noexcept { return modes.empty() ? 0 : modes.front().size(); }
  bool centered() const noexcept { return centering == Centering::mean; }
};

namespace detail {

// Classical Gram-Schmidt with reorthogonalization in the M inner product:
// cols = Q R with Q^T M Q = I. Columns whose residual vanishes add no row.
struct MassQr {
  std::vector<Vector> q;
  std::vector<Vector> mq;
  DenseMatrix r;
};

inline MassQr mass_qr(const std::vector<Vector>& cols, const SparseMatrix& mass) {
  MassQr out;
  std::vector<Vector> coefs;
  for (const Vector& u : cols) {
    Vector w = u;
    Vector coef(out.q.size(), 0.0);
    const double norm0 = std::sqrt(std::max(0.0, mass.bilinear(u, u)));
    for (int pass = 0; pass < 2; ++pass) {
      Vector h(out.q.size());
      for (std::size_t k = 0; k < out.q.size(); ++k) h[k] = dot(out.mq[k], w);
      for (std::size_t k = 0; k < out.q.size(); ++k) {
        axpy(-h[k], out.q[k], w);
        coef[k] += h[k];
      }
    }
    const Vector mw = mass.multiply(w);
    const double rho = std::sqrt(std::max(0.0, dot(w, mw)));
    if (rho > 1e-14 * norm0 && rho > 0.0) {
      const double inv = 1.0 / rho;
      for (double& x : w) x *= inv;
      Vector mqk = mass.multiply(w);
      out.q.push_back(std::move(w));
      out.mq.push_back(std::move(mqk));
      coef.push_back(rho);
    }
    coefs.push_back(std::move(coef));
  }
  out.r = DenseMatrix(out.q.size(), cols.size());
  for (std::size_t j = 0; j < coefs.size(); ++j)
    for (std::size_t i = 0; i < coefs[j].size(); ++i) out.r(i, j) = coefs[j][i];
  return out;
}

inline Vector snapshot_mean(const SnapshotSet& s) {
  Vector mean(s.dofs(), 0.0);
  for (const Vector& u : s.fields) axpy(1.0, u, mean);
  for (double& x : mean) x /= static_cast<double>(s.size());
  return mean;
}

}  // namespace detail

// Method of snapshots. The Gram matrix C = U^T M U / m is never formed:
// U = Q R in the M inner product, and the SVD R = V S W^T gives the
// eigenpairs of C as (s_k^2 / m, w_k) with modes psi_k = Q v_k, which is
// U w_k / sqrt(m lambda_k). Signs follow the eigenvector rule on w_k.
// stiffness is the unscaled (grad u, grad v) matrix.
inline PodBasis build_pod_basis(const SnapshotSet& snapshots, const SparseMatrix& mass, const SparseMatrix& stiffness,
                                const PodOptions& options = {}) {
  snapshots.validate();
  NSROM_REQUIRE(snapshots.size() >= 1, "build_pod_basis: empty snapshot set");
  NSROM_REQUIRE(snapshots.dofs() == mass.rows(), "build_pod_basis: snapshot length does not match the mass matrix");
  NSROM_REQUIRE(options.rank_cutoff >= 0.0, "build_pod_basis: negative rank cutoff");
  const std::size_t m = snapshots.size();

  PodBasis basis;
  basis.centering = options.centering;
  basis.snapshot_count = m;
  std::vector<Vector> cols = snapshots.fields;
  if (options.centering == Centering::mean) {
    basis.mean = detail::snapshot_mean(snapshots);
    for (Vector& c : cols) axpy(-1.0, basis.mean, c);
  }

  const detail::MassQr qr = detail::mass_qr(cols, mass);
  if (qr.q.empty()) throw PreconditionError("build_pod_basis: snapshot set has rank 0");
  const std::size_t q = qr.q.size();
  const Svd svd = jacobi_svd(qr.r.transpose());  // R^T = W S V^T
  if (!(svd.values[0] > 0.0)) throw PreconditionError("build_pod_basis: snapshot set has rank 0");

  const double lambda1 = svd.values[0] * svd.values[0] / static_cast<double>(m);
  for (std::size_t k = 0; k < q; ++k) {
    const double lambda = svd.values[k] * svd.values[k] / static_cast<double>(m);
    Vector psi(snapshots.dofs(), 0.0);
    for (std::size_t i = 0; i < q; ++i) axpy(svd.right(i, k), qr.q[i], psi);
    const bool keep = lambda > options.rank_cutoff * lambda1 && lambda > 0.0;
    const double g2 = std::max(0.0, stiffness.bilinear(psi, psi));
    if (!keep) {
      basis.tail += g2 * lambda;
      continue;
    }
    std::size_t big = 0;
    for (std::size_t j = 1; j < m; ++j)
      if (std::abs(svd.left(j, k)) > std::abs(svd.left(big, k))) big = j;
    if (svd.left(big, k) < 0.0)
      for (double& x : psi) x = -x;
    basis.eigenvalues.push_back(lambda);
    basis.grad_norms.push_back(std::sqrt(g2));
    basis.mass_modes.push_back(mass.multiply(psi));
    basis.modes.push_back(std::move(psi));
  }
  return basis;
}

inline PodBasis build_pod_basis(const TaylorHoodSpace& space, const SnapshotSet& snapshots,
                                const PodOptions& options = {}) {
  const LinearOperators ops = assemble_linear_operators(space, 1.0);
  return build_pod_basis(snapshots, ops.mass, ops.stiffness, options);
}

// a_i = (u - mean, psi_i), i < r
inline Vector project_field(const PodBasis& basis, std::size_t r, std::span<const double> u) {
  NSROM_REQUIRE(r <= basis.rank(), "project_field: r = " + std::to_string(r) + " exceeds basis rank " +
                                       std::to_string(basis.rank()));
  NSROM_REQUIRE(u.size() == basis.dofs(), "project_field: field length does not match the basis");
  Vector a(r);
  for (std::size_t i = 0; i < r; ++i) {
    a[i] = dot(basis.mass_modes[i], u);
    if (basis.centered()) a[i] -= dot(basis.mass_modes[i], basis.mean);
  }
  return a;
}

inline Vector reconstruct_field(const PodBasis& basis, std::span<const double> a) {
  NSROM_REQUIRE(a.size() <= basis.rank(), "reconstruct_field: " + std::to_string(a.size()) +
                                              " coefficients exceed basis rank " + std::to_string(basis.rank()));
  Vector u = basis.centered() ? basis.mean : Vector(basis.dofs(), 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) axpy(a[j], basis.modes[j], u);
  return u;
}

struct ProjectionError {
  double lhs;
  double rhs;
};

// lhs = (1/m) sum_j ||grad(u_j - mean - P_r(u_j - mean))||^2 by direct
// quadrature; rhs = sum_{k > r} ||grad psi_k||^2 lambda_k + tail.
inline ProjectionError pod_projection_error(const TaylorHoodSpace& space, const PodBasis& basis,
                                            const SnapshotSet& snapshots, std::size_t r) {
  NSROM_REQUIRE(r <= basis.rank(), "pod_projection_error: r = " + std::to_string(r) + " exceeds basis rank " +
                                       std::to_string(basis.rank()));
  double lhs = 0.0;
  for (const Vector& u : snapshots.fields) {
    const Vector a = project_field(basis, r, u);
    const Vector w = reconstruct_field(basis, a);
    const double g = field_norms(space, u - w).h1_semi;
    lhs += g * g;
  }
  lhs /= static_cast<double>(snapshots.size());
  double rhs = basis.tail;
  for (std::size_t k = basis.rank(); k-- > r;) rhs += basis.grad_norms[k] * basis.grad_norms[k] * basis.eigenvalues[k];
  return {lhs, rhs};
}

}  // namespace nsrom
