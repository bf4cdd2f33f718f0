#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

enum class NonlinearForm { convective, skew, rotational, emac };

inline constexpr std::array<NonlinearForm, 4> all_forms{NonlinearForm::convective, NonlinearForm::skew,
                                                        NonlinearForm::rotational, NonlinearForm::emac};

inline std::string to_string(NonlinearForm f) {
  switch (f) {
    case NonlinearForm::convective: return "convective";
    case NonlinearForm::skew: return "skew";
    case NonlinearForm::rotational: return "rotational";
    case NonlinearForm::emac: return "emac";
  }
  return "?";
}

inline NonlinearForm parse_form(std::string_view s) {
  for (NonlinearForm f : all_forms)
    if (s == to_string(f)) return f;
  throw ConfigError("unknown nonlinear form '" + std::string(s) + "' (expected convective, skew, rotational or emac)");
}

// b(u, v, w) = integral of form_integrand(u, v) . w. The first argument is
// the advecting field.
inline std::array<double, 2> form_integrand(NonlinearForm form, const PointValue& u, const PointValue& v) {
  std::array<double, 2> g{};
  switch (form) {
    case NonlinearForm::convective:
      for (int a = 0; a < 2; ++a) g[a] = u.u[0] * v.g[a][0] + u.u[1] * v.g[a][1];
      break;
    case NonlinearForm::skew: {
      const double half_div = 0.5 * u.div();
      for (int a = 0; a < 2; ++a) g[a] = u.u[0] * v.g[a][0] + u.u[1] * v.g[a][1] + half_div * v.u[a];
      break;
    }
    case NonlinearForm::rotational: {
      // (curl u) x v in 2D with scalar curl
      const double w = u.curl();
      g[0] = -w * v.u[1];
      g[1] = w * v.u[0];
      break;
    }
    case NonlinearForm::emac: {
      // 2 D(v) u + (div u) v
      const double d = u.div();
      for (int a = 0; a < 2; ++a)
        g[a] = u.u[0] * v.g[a][0] + u.u[1] * v.g[a][1] + u.u[0] * v.g[0][a] + u.u[1] * v.g[1][a] + d * v.u[a];
      break;
    }
  }
  return g;
}

inline void require_on_space(const TaylorHoodSpace& space, std::span<const double> u, const char* what) {
  if (u.size() != space.velocity_dofs())
    throw PreconditionError(std::string(what) + ": field has " + std::to_string(u.size()) +
                            " coefficients, space has " + std::to_string(space.velocity_dofs()));
}

inline double trilinear_value(const TaylorHoodSpace& space, NonlinearForm form, std::span<const double> u,
                              std::span<const double> v, std::span<const double> w) {
  require_on_space(space, u, "trilinear_value");
  require_on_space(space, v, "trilinear_value");
  require_on_space(space, w, "trilinear_value");
  double sum = 0.0;
  for (std::size_t t = 0; t < space.element_count(); ++t) {
    const ElementData& el = space.element(t);
    const auto dofs = space.element_velocity_dofs(t);
    for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
      const PointValue pu = evaluate(el.p2[q], dofs, u);
      const PointValue pv = evaluate(el.p2[q], dofs, v);
      const PointValue pw = evaluate(el.p2[q], dofs, w);
      const auto g = form_integrand(form, pu, pv);
      sum += el.jxw[q] * (g[0] * pw.u[0] + g[1] * pw.u[1]);
    }
  }
  return sum;
}

// Local basis function 2a + c as a PointValue at quadrature point q.
inline PointValue basis_point(const P2Point& p2, int local) {
  PointValue v;
  const int a = local / 2, c = local % 2;
  v.u[c] = p2.value[a];
  v.g[c][0] = p2.grad[a][0];
  v.g[c][1] = p2.grad[a][1];
  return v;
}

// Element contributions of R_i = b(u, u, phi_i) and its Jacobian
// J_ij = b(phi_j, u, phi_i) + b(u, phi_j, phi_i).
struct ElementNonlinear {
  std::array<double, 12> residual{};
  std::array<std::array<double, 12>, 12> jacobian{};
};

inline ElementNonlinear element_nonlinear(const TaylorHoodSpace& space, NonlinearForm form, std::span<const double> u,
                                          std::size_t t, bool with_jacobian = true) {
  ElementNonlinear out;
  const ElementData& el = space.element(t);
  const auto dofs = space.element_velocity_dofs(t);
  for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
    const P2Point& p2 = el.p2[q];
    const PointValue pu = evaluate(p2, dofs, u);
    const auto g = form_integrand(form, pu, pu);
    const double w = el.jxw[q];
    for (int i = 0; i < 12; ++i) out.residual[i] += w * g[i % 2] * p2.value[i / 2];
    if (!with_jacobian) continue;
    for (int j = 0; j < 12; ++j) {
      const PointValue phi = basis_point(p2, j);
      const auto h1 = form_integrand(form, phi, pu);
      const auto h2 = form_integrand(form, pu, phi);
      const double hx = w * (h1[0] + h2[0]), hy = w * (h1[1] + h2[1]);
      for (int a = 0; a < 6; ++a) {
        out.jacobian[2 * a][j] += hx * p2.value[a];
        out.jacobian[2 * a + 1][j] += hy * p2.value[a];
      }
    }
  }
  return out;
}

// Velocity-velocity sparsity pattern of the P2 space (all zeros).
inline SparseMatrix velocity_pattern(const TaylorHoodSpace& space) {
  std::vector<Triplet> t;
  t.reserve(space.element_count() * 144);
  for (std::size_t e = 0; e < space.element_count(); ++e) {
    const auto d = space.element_velocity_dofs(e);
    for (std::size_t i : d)
      for (std::size_t j : d) t.push_back({i, j, 0.0});
  }
  return SparseMatrix::from_triplets(space.velocity_dofs(), space.velocity_dofs(), std::move(t));
}

struct NonlinearContribution {
  Vector residual;
  SparseMatrix jacobian;
};

inline NonlinearContribution nonlinear_residual_and_jacobian(const TaylorHoodSpace& space, NonlinearForm form,
                                                             std::span<const double> u) {
  require_on_space(space, u, "nonlinear_residual_and_jacobian");
  NonlinearContribution out{Vector(space.velocity_dofs(), 0.0), velocity_pattern(space)};
  for (std::size_t t = 0; t < space.element_count(); ++t) {
    const auto d = space.element_velocity_dofs(t);
    const ElementNonlinear loc = element_nonlinear(space, form, u, t);
    for (int i = 0; i < 12; ++i) {
      out.residual[d[i]] += loc.residual[i];
      for (int j = 0; j < 12; ++j) out.jacobian.add(d[i], d[j], loc.jacobian[i][j]);
    }
  }
  return out;
}

inline Vector nonlinear_residual(const TaylorHoodSpace& space, NonlinearForm form, std::span<const double> u) {
  require_on_space(space, u, "nonlinear_residual");
  Vector r(space.velocity_dofs(), 0.0);
  for (std::size_t t = 0; t < space.element_count(); ++t) {
    const auto d = space.element_velocity_dofs(t);
    const ElementNonlinear loc = element_nonlinear(space, form, u, t, false);
    for (int i = 0; i < 12; ++i) r[d[i]] += loc.residual[i];
  }
  return r;
}

}  // namespace nsrom
