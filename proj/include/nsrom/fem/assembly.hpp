#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "nsrom/fem/forms.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/numerics/sparse.hpp"

namespace nsrom {

struct LinearOperators {
  SparseMatrix mass;       // (u, v)
  SparseMatrix stiffness;  // nu (grad u, grad v)
  SparseMatrix divergence; // B[q][j] = (div phi_j, q), pressure x velocity
};

namespace detail {

inline SparseMatrix pressure_velocity_pattern(const TaylorHoodSpace& space) {
  std::vector<Triplet> t;
  t.reserve(space.element_count() * 36);
  for (std::size_t e = 0; e < space.element_count(); ++e) {
    const auto vd = space.element_velocity_dofs(e);
    for (std::size_t q : space.element_pressure_dofs(e))
      for (std::size_t j : vd) t.push_back({q, j, 0.0});
  }
  return SparseMatrix::from_triplets(space.pressure_dofs(), space.velocity_dofs(), std::move(t));
}

}  // namespace detail

inline LinearOperators assemble_linear_operators(const TaylorHoodSpace& space, double nu) {
  LinearOperators ops{velocity_pattern(space), velocity_pattern(space), detail::pressure_velocity_pattern(space)};
  for (std::size_t t = 0; t < space.element_count(); ++t) {
    const ElementData& el = space.element(t);
    const auto vd = space.element_velocity_dofs(t);
    const auto pd = space.element_pressure_dofs(t);
    std::array<std::array<double, 6>, 6> mass{}, stiff{};
    std::array<std::array<double, 12>, 3> div{};
    for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
      const P2Point& p2 = el.p2[q];
      const double w = el.jxw[q];
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          mass[a][b] += w * (p2.value[a] * p2.value[b]);
          stiff[a][b] += w * (p2.grad[a][0] * p2.grad[b][0] + p2.grad[a][1] * p2.grad[b][1]);
        }
      for (int k = 0; k < 3; ++k)
        for (int b = 0; b < 6; ++b)
          for (int c = 0; c < 2; ++c) div[k][2 * b + c] += w * el.p1[q][k] * p2.grad[b][c];
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c) {
          ops.mass.add(vd[2 * a + c], vd[2 * b + c], mass[a][b]);
          ops.stiffness.add(vd[2 * a + c], vd[2 * b + c], nu * stiff[a][b]);
        }
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 12; ++j) ops.divergence.add(pd[k], vd[j], div[k][j]);
  }
  return ops;
}

struct FieldNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double div_l2 = 0.0;
  double curl_l2 = 0.0;
};

// All four norms by elementwise quadrature (exact for P2 fields).
inline FieldNorms field_norms(const TaylorHoodSpace& space, std::span<const double> u) {
  require_on_space(space, u, "field_norms");
  double l2 = 0, h1 = 0, dv = 0, cu = 0;
  for (std::size_t t = 0; t < space.element_count(); ++t) {
    const ElementData& el = space.element(t);
    const auto dofs = space.element_velocity_dofs(t);
    for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
      const PointValue p = evaluate(el.p2[q], dofs, u);
      const double w = el.jxw[q];
      l2 += w * (p.u[0] * p.u[0] + p.u[1] * p.u[1]);
      h1 += w * (p.g[0][0] * p.g[0][0] + p.g[0][1] * p.g[0][1] + p.g[1][0] * p.g[1][0] + p.g[1][1] * p.g[1][1]);
      dv += w * p.div() * p.div();
      cu += w * p.curl() * p.curl();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(dv), std::sqrt(cu)};
}

// Monolithic [velocity | pressure] pattern plus, per element, the value
// positions of the local blocks so Newton assembly avoids searches.
class SystemPattern {
 public:
  explicit SystemPattern(const TaylorHoodSpace& space) : nu_(space.velocity_dofs()), np_(space.pressure_dofs()) {
    std::vector<Triplet> t;
    t.reserve(space.element_count() * (144 + 72) + nu_ + np_);
    for (std::size_t e = 0; e < space.element_count(); ++e) {
      const auto vd = space.element_velocity_dofs(e);
      const auto pd = space.element_pressure_dofs(e);
      for (std::size_t i : vd)
        for (std::size_t j : vd) t.push_back({i, j, 0.0});
      for (std::size_t q : pd)
        for (std::size_t j : vd) {
          t.push_back({nu_ + q, j, 0.0});
          t.push_back({j, nu_ + q, 0.0});
        }
    }
    // Diagonal entries so constrained / pinned rows can become identity rows.
    for (std::size_t i = 0; i < nu_ + np_; ++i) t.push_back({i, i, 0.0});
    matrix_ = SparseMatrix::from_triplets(nu_ + np_, nu_ + np_, std::move(t));

    vv_.resize(space.element_count());
    vp_.resize(space.element_count());
    pv_.resize(space.element_count());
    for (std::size_t e = 0; e < space.element_count(); ++e) {
      const auto vd = space.element_velocity_dofs(e);
      const auto pd = space.element_pressure_dofs(e);
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) vv_[e][12 * i + j] = matrix_.find(vd[i], vd[j]);
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 12; ++j) {
          pv_[e][12 * k + j] = matrix_.find(nu_ + pd[k], vd[j]);
          vp_[e][3 * j + k] = matrix_.find(vd[j], nu_ + pd[k]);
        }
    }
  }

  std::size_t velocity_dofs() const noexcept { return nu_; }
  std::size_t pressure_dofs() const noexcept { return np_; }
  std::size_t size() const noexcept { return nu_ + np_; }

  // A zero matrix on the system pattern.
  const SparseMatrix& matrix() const noexcept { return matrix_; }

  const std::array<std::size_t, 144>& velocity_block(std::size_t e) const { return vv_[e]; }
  const std::array<std::size_t, 36>& pressure_velocity_block(std::size_t e) const { return pv_[e]; }
  const std::array<std::size_t, 36>& velocity_pressure_block(std::size_t e) const { return vp_[e]; }

 private:
  std::size_t nu_;
  std::size_t np_;
  SparseMatrix matrix_;
  std::vector<std::array<std::size_t, 144>> vv_;
  std::vector<std::array<std::size_t, 36>> pv_;
  std::vector<std::array<std::size_t, 36>> vp_;
};

}  // namespace nsrom
