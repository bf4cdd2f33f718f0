#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/fem/assembly.hpp"
#include "nsrom/fem/forms.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/numerics/quadrature.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

struct ScalarSeries {
  std::string label;
  Vector times;
  Vector values;

  void push(double t, double v) {
    NSROM_REQUIRE(times.empty() || t > times.back(), "ScalarSeries: times must increase");
    times.push_back(t);
    values.push_back(v);
  }
  std::size_t size() const noexcept { return times.size(); }
};

struct EnergyEnstrophy {
  double energy;
  double enstrophy;
};

inline EnergyEnstrophy energy_enstrophy(const TaylorHoodSpace& space, std::span<const double> u) {
  const FieldNorms n = field_norms(space, u);
  return {0.5 * n.l2 * n.l2, 0.5 * n.curl_l2 * n.curl_l2};
}

// c_d = 20 * integral over the labeled curve of (nu d(u.t)/dn n_y - p n_x),
// with n the unit normal pointing from the obstacle into the fluid and
// t = (n_y, -n_x). Edges are integrated with 3-point Gauss using the
// gradient of the adjacent triangle.
inline double drag_coefficient(const TaylorHoodSpace& space, std::span<const double> u, std::span<const double> p,
                               int label, double nu) {
  require_on_space(space, u, "drag_coefficient");
  NSROM_REQUIRE(p.size() == space.pressure_dofs(), "drag_coefficient: pressure size mismatch");
  const Mesh& mesh = space.mesh();
  if (!mesh.has_label(label)) throw ConfigError("drag_coefficient: mesh has no edges labeled " + std::to_string(label));
  const LineQuadrature line = gauss3_unit_interval();
  double sum = 0.0;
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    if (be.label != label) continue;
    const auto [t, k] = space.edge_elements(space.edge_id(be.vertices[0], be.vertices[1]))[0];
    const auto& tri = mesh.triangles[t];
    const Point& a = mesh.vertices[tri[k]];
    const Point& b = mesh.vertices[tri[(k + 1) % 3]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    // Triangles are counterclockwise, so the fluid lies left of a -> b and
    // the obstacle to the right; the normal into the fluid is the left normal.
    const std::array<double, 2> n{-(b.y - a.y) / len, (b.x - a.x) / len};
    const std::array<double, 2> tan{n[1], -n[0]};
    const ElementData& el = space.element(t);
    const auto dofs = space.element_velocity_dofs(t);
    const auto pd = space.element_pressure_dofs(t);
    for (int g = 0; g < 3; ++g) {
      std::array<double, 3> lam{0.0, 0.0, 0.0};
      lam[k] = 1.0 - line.points[g];
      lam[(k + 1) % 3] = line.points[g];
      const PointValue pv = evaluate(p2_at(lam, el.grad_lambda), dofs, u);
      const double pressure = lam[0] * p[pd[0]] + lam[1] * p[pd[1]] + lam[2] * p[pd[2]];
      double dut_dn = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) dut_dn += tan[i] * pv.g[i][j] * n[j];
      sum += line.weights[g] * len * (nu * dut_dn * n[1] - pressure * n[0]);
    }
  }
  return 20.0 * sum;
}

// Volume (weighted residual) drag: the momentum residual tested with a field
// equal to (1, 0) on the obstacle nodes and zero at every other node.
// dudt is the discrete time derivative used by the scheme.
inline double drag_volume(const TaylorHoodSpace& space, const LinearOperators& ops, NonlinearForm form,
                          std::span<const double> u, std::span<const double> p, std::span<const double> dudt,
                          int label) {
  require_on_space(space, u, "drag_volume");
  require_on_space(space, dudt, "drag_volume");
  const Mesh& mesh = space.mesh();
  if (!mesh.has_label(label)) throw ConfigError("drag_volume: mesh has no edges labeled " + std::to_string(label));
  Vector vd(space.velocity_dofs(), 0.0);
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    if (be.label != label) continue;
    const std::size_t e = space.edge_id(be.vertices[0], be.vertices[1]);
    for (std::size_t raw : {be.vertices[0], be.vertices[1], space.vertex_count() + e})
      vd[2 * space.merged_node(raw)] = 1.0;
  }
  const double inertia = ops.mass.bilinear(vd, dudt);
  const double convection = dot(vd, nonlinear_residual(space, form, u));
  const double viscous = ops.stiffness.bilinear(vd, u);
  const double pressure = dot(p, ops.divergence.multiply(vd));
  return -20.0 * (inertia + convection + viscous - pressure);
}

// (dt * sum_n v_n^p)^(1/p) over the given per-step norms; p = 0 means max.
inline double discrete_time_norm(std::span<const double> norms, double dt, int p) {
  NSROM_REQUIRE(p == 0 || p == 1 || p == 2, "discrete_time_norm: p must be 1, 2 or infinity (0)");
  if (p == 0) return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
  double s = 0.0;
  for (double v : norms) s += std::pow(std::abs(v), p);
  return std::pow(dt * s, 1.0 / p);
}

inline constexpr int time_norm_inf = 0;

// Same, over fields; k = 0 uses the L2 norm, k = 1 the H1 seminorm.
inline double discrete_time_norm(const TaylorHoodSpace& space, const std::vector<Vector>& fields, double dt, int p,
                                 int k) {
  NSROM_REQUIRE(k == 0 || k == 1, "discrete_time_norm: k must be 0 or 1");
  Vector norms;
  norms.reserve(fields.size());
  for (const Vector& f : fields) {
    const FieldNorms n = field_norms(space, f);
    norms.push_back(k == 0 ? n.l2 : n.h1_semi);
  }
  return discrete_time_norm(norms, dt, p);
}

using GradientFunction = std::function<std::array<std::array<double, 2>, 2>(double x, double y)>;

// ||grad(u_exact - u_h)|| with the element quadrature rule.
inline double h1_semi_error(const TaylorHoodSpace& space, std::span<const double> u, const GradientFunction& exact) {
  require_on_space(space, u, "h1_semi_error");
  double s = 0.0;
  for (std::size_t t = 0; t < space.element_count(); ++t) {
    const ElementData& el = space.element(t);
    const auto dofs = space.element_velocity_dofs(t);
    for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
      const PointValue p = evaluate(el.p2[q], dofs, u);
      const auto g = exact(el.x[q].x, el.x[q].y);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += el.jxw[q] * (g[a][b] - p.g[a][b]) * (g[a][b] - p.g[a][b]);
    }
  }
  return std::sqrt(s);
}

struct TrajectoryError {
  double linf_l2 = 0.0;  // max_n ||w^n - u^n||
  double l2_h1 = 0.0;    // nu dt sum_{n>=1} ||grad(w^n - u^n)||^2
  double c_u = 0.0;      // max_n ||grad u^n||
  ScalarSeries div_series{"div_error", {}, {}};
};

// FOM fields u^n against reconstructed ROM fields w^n on the same grid.
inline TrajectoryError trajectory_error(const TaylorHoodSpace& space, std::span<const Vector> fom, const Vector& fom_times,
                                        std::span<const Vector> rom, const Vector& rom_times, double nu) {
  if (fom.size() != rom.size() || fom_times.size() != rom_times.size() || fom.size() != fom_times.size())
    throw PreconditionError("trajectory_error: time grids differ in length (" + std::to_string(fom.size()) + " vs " +
                            std::to_string(rom.size()) + ")");
  for (std::size_t n = 0; n < fom_times.size(); ++n)
    if (std::abs(fom_times[n] - rom_times[n]) > 1e-9 * std::max(1.0, std::abs(fom_times[n])))
      throw PreconditionError("trajectory_error: time grids differ at index " + std::to_string(n));
  TrajectoryError out;
  for (std::size_t n = 0; n < fom.size(); ++n) {
    const FieldNorms e = field_norms(space, rom[n] - fom[n]);
    const FieldNorms f = field_norms(space, fom[n]);
    out.linf_l2 = std::max(out.linf_l2, e.l2);
    if (n > 0) out.l2_h1 += nu * (fom_times[n] - fom_times[n - 1]) * e.h1_semi * e.h1_semi;
    out.c_u = std::max(out.c_u, f.h1_semi);
    out.div_series.push(fom_times[n], f.div_l2);
  }
  return out;
}

}  // namespace nsrom
