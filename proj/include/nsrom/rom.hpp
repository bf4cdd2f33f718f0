#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nsrom/diagnostics.hpp"
#include "nsrom/errors.hpp"
#include "nsrom/fem/assembly.hpp"
#include "nsrom/fem/forms.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/fom.hpp"
#include "nsrom/numerics/dense.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "nsrom/pod.hpp"

namespace nsrom {

// Galerkin projection of the momentum equation onto mean + span{psi_1..psi_r}.
// The reduced mass matrix is the identity.
struct RomOperators {
  std::size_t r = 0;
  NonlinearForm form = NonlinearForm::skew;
  double nu = 0.0;
  bool centered = false;
  DenseMatrix a;   // nu (grad psi_j, grad psi_i)
  Vector t;        // t[(i r + j) r + k] = b(psi_j, psi_k, psi_i)
  DenseMatrix l1;  // b(mean, psi_j, psi_i)
  DenseMatrix l2;  // b(psi_j, mean, psi_i)
  Vector c;        // b(mean, mean, psi_i) + nu (grad mean, grad psi_i)
  Vector g;        // (f, psi_i)

  double tensor(std::size_t i, std::size_t j, std::size_t k) const { return t[(i * r + j) * r + k]; }

  // N(a)_i = sum_jk T[i][j][k] a_j a_k
  Vector nonlinear(std::span<const double> coef) const {
    NSROM_REQUIRE(coef.size() == r, "RomOperators::nonlinear: coefficient count differs from r");
    Vector n(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < r; ++j) {
        if (coef[j] == 0.0) continue;
        const double* row = &t[(i * r + j) * r];
        double inner = 0.0;
        for (std::size_t k = 0; k < r; ++k) inner += row[k] * coef[k];
        s += coef[j] * inner;
      }
      n[i] = s;
    }
    return n;
  }
};

// One pass over the elements accumulates every tensor entry. forcing is
// taken at t = 0 (steady forcing only).
inline RomOperators assemble_rom_operators(const TaylorHoodSpace& space, const PodBasis& basis, std::size_t r,
                                           NonlinearForm form, double nu, const VectorFunction& forcing = {}) {
  NSROM_REQUIRE(r >= 1 && r <= basis.rank(), "assemble_rom_operators: r = " + std::to_string(r) +
                                                  " outside [1, " + std::to_string(basis.rank()) + "]");
  NSROM_REQUIRE(basis.dofs() == space.velocity_dofs(), "assemble_rom_operators: basis does not match the space");
  NSROM_REQUIRE(nu > 0.0, "assemble_rom_operators: nu must be positive");
  RomOperators ops;
  ops.r = r;
  ops.form = form;
  ops.nu = nu;
  ops.centered = basis.centered();
  ops.a = DenseMatrix(r, r);
  ops.t.assign(r * r * r, 0.0);
  ops.l1 = DenseMatrix(r, r);
  ops.l2 = DenseMatrix(r, r);
  ops.c.assign(r, 0.0);
  ops.g.assign(r, 0.0);

  std::vector<PointValue> pv(r);
  std::vector<std::array<double, 2>> gjk(r);
  for (std::size_t e = 0; e < space.element_count(); ++e) {
    const ElementData& el = space.element(e);
    const auto dofs = space.element_velocity_dofs(e);
    for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
      const double w = el.jxw[q];
      for (std::size_t i = 0; i < r; ++i) pv[i] = evaluate(el.p2[q], dofs, basis.modes[i]);
      for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t k = 0; k < r; ++k) gjk[k] = form_integrand(form, pv[j], pv[k]);
        for (std::size_t i = 0; i < r; ++i) {
          const double ux = w * pv[i].u[0], uy = w * pv[i].u[1];
          double* row = &ops.t[(i * r + j) * r];
          for (std::size_t k = 0; k < r; ++k) row[k] += gjk[k][0] * ux + gjk[k][1] * uy;
        }
      }
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
          double s = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) s += pv[i].g[a][b] * pv[j].g[a][b];
          ops.a(i, j) += w * nu * s;
        }
      if (forcing) {
        const auto f = forcing(el.x[q].x, el.x[q].y, 0.0);
        for (std::size_t i = 0; i < r; ++i) ops.g[i] += w * (f[0] * pv[i].u[0] + f[1] * pv[i].u[1]);
      }
      if (!ops.centered) continue;
      const PointValue mean = evaluate(el.p2[q], dofs, basis.mean);
      const auto gmm = form_integrand(form, mean, mean);
      for (std::size_t i = 0; i < r; ++i) {
        double visc = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) visc += mean.g[a][b] * pv[i].g[a][b];
        ops.c[i] += w * (gmm[0] * pv[i].u[0] + gmm[1] * pv[i].u[1] + nu * visc);
      }
      for (std::size_t j = 0; j < r; ++j) {
        const auto g1 = form_integrand(form, mean, pv[j]);
        const auto g2 = form_integrand(form, pv[j], mean);
        for (std::size_t i = 0; i < r; ++i) {
          ops.l1(i, j) += w * (g1[0] * pv[i].u[0] + g1[1] * pv[i].u[1]);
          ops.l2(i, j) += w * (g2[0] * pv[i].u[0] + g2[1] * pv[i].u[1]);
        }
      }
    }
  }
  return ops;
}

struct RomSettings {
  double dt = 0.01;
  double t_end = 1.0;  // duration of the ROM run
  double t0 = 0.0;     // time of the initial coefficients
  TimeScheme scheme = TimeScheme::bdf2;
  NewtonSettings newton;
};

struct RomTrajectory {
  std::vector<Vector> coefficients;
  Vector times;
  std::vector<int> newton_iterations;  // per step, 0 for the initial state

  std::size_t size() const noexcept { return times.size(); }
};

// Residual of one implicit step and its Jacobian.
inline Vector rom_step_residual(const RomOperators& ops, std::span<const double> a, std::span<const double> an,
                                std::span<const double> anm1, TimeCoefficients c, double dt,
                                DenseMatrix* jacobian = nullptr) {
  const std::size_t r = ops.r;
  Vector res = ops.nonlinear(a);
  for (std::size_t i = 0; i < r; ++i) {
    double s = (c.alpha * a[i] - c.beta * an[i] + (c.gamma != 0.0 ? c.gamma * anm1[i] : 0.0)) / dt;
    s += ops.c[i] - ops.g[i];
    for (std::size_t j = 0; j < r; ++j) s += (ops.a(i, j) + ops.l1(i, j) + ops.l2(i, j)) * a[j];
    res[i] += s;
  }
  if (jacobian) {
    DenseMatrix& jac = *jacobian;
    jac = DenseMatrix(r, r);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        double s = ops.a(i, j) + ops.l1(i, j) + ops.l2(i, j);
        const double* row = &ops.t[(i * r + j) * r];
        for (std::size_t k = 0; k < r; ++k) s += row[k] * a[k] + ops.tensor(i, k, j) * a[k];
        jac(i, j) = s;
      }
      jac(i, i) += c.alpha / dt;
    }
  }
  return res;
}

inline RomTrajectory run_rom(const RomOperators& ops, const Vector& a0, const RomSettings& settings) {
  NSROM_REQUIRE(a0.size() == ops.r, "run_rom: initial coefficients have length " + std::to_string(a0.size()) +
                                        ", expected " + std::to_string(ops.r));
  if (!(settings.dt > 0)) throw ConfigError("dt must be positive");
  const std::size_t steps = step_count(settings.t_end, settings.dt);
  RomTrajectory traj;
  traj.coefficients.reserve(steps + 1);
  traj.coefficients.push_back(a0);
  traj.times.push_back(settings.t0);
  traj.newton_iterations.push_back(0);
  DenseMatrix jac;
  for (std::size_t n = 0; n < steps; ++n) {
    const TimeCoefficients c = time_coefficients(settings.scheme, n);
    const Vector& an = traj.coefficients[n];
    const std::span<const double> anm1 = n > 0 ? std::span<const double>(traj.coefficients[n - 1]) : std::span<const double>();
    Vector a = an;
    int it = 0;
    double res = 0.0;
    while (true) {
      Vector r = rom_step_residual(ops, a, an, anm1, c, settings.dt, &jac);
      res = norm2(r);
      if (!std::isfinite(res)) throw StepError("ROM Newton residual is not finite", n + 1, res);
      if (it >= 1 && res <= settings.newton.tolerance) break;
      if (it >= settings.newton.max_iterations)
        throw StepError("ROM Newton did not converge in " + std::to_string(it) + " iterations", n + 1, res);
      for (double& v : r) v = -v;
      const Vector delta = DenseLU(jac).solve(r);
      axpy(settings.newton.damping, delta, a);
      ++it;
    }
    traj.coefficients.push_back(std::move(a));
    traj.times.push_back(settings.t0 + static_cast<double>(n + 1) * settings.dt);
    traj.newton_iterations.push_back(it);
  }
  return traj;
}

inline std::vector<Vector> reconstruct_trajectory(const PodBasis& basis, const RomTrajectory& traj) {
  std::vector<Vector> out;
  out.reserve(traj.size());
  for (const Vector& a : traj.coefficients) out.push_back(reconstruct_field(basis, a));
  return out;
}

// Pressure of a velocity trajectory that does not satisfy the FOM equations
// exactly: with R = M dudt + K u + N(u) - F, solve
// [M -B^T; -B 0][z; p] = [-R; 0]. For a FOM state z = 0 and p is the FOM
// pressure.
class PressureRecovery {
 public:
  PressureRecovery(const TaylorHoodSpace& space, double nu, NonlinearForm form, VectorFunction forcing = {})
      : space_(space), form_(form), forcing_(std::move(forcing)), ops_(assemble_linear_operators(space, nu)),
        sys_(mass_saddle_matrix(space, assemble_linear_operators(space, 1.0))), weights_(pressure_mean_weights(space)) {
    lu_.analyze(sys_);
    lu_.factorize(sys_);
  }

  Vector pressure(std::span<const double> u, std::span<const double> dudt, double t) const {
    require_on_space(space_, u, "PressureRecovery");
    require_on_space(space_, dudt, "PressureRecovery");
    const std::size_t nv = space_.velocity_dofs();
    Vector r = ops_.mass.multiply(dudt);
    axpy(1.0, ops_.stiffness.multiply(u), r);
    axpy(1.0, nonlinear_residual(space_, form_, u), r);
    if (forcing_) {
      for (std::size_t e = 0; e < space_.element_count(); ++e) {
        const ElementData& el = space_.element(e);
        const auto d = space_.element_velocity_dofs(e);
        for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
          const auto fv = forcing_(el.x[q].x, el.x[q].y, t);
          for (int a = 0; a < 6; ++a)
            for (int c = 0; c < 2; ++c) r[d[2 * a + c]] -= el.jxw[q] * fv[c] * el.p2[q].value[a];
        }
      }
    }
    for (double& v : r) v = -v;
    for (std::size_t i = 0; i < nv; ++i)
      if (space_.is_constrained(i)) r[i] = 0.0;
    r.resize(nv + space_.pressure_dofs(), 0.0);
    const Vector sol = lu_.solve(r);
    Vector p(sol.begin() + static_cast<std::ptrdiff_t>(nv), sol.end());
    // same normalization as the FOM
    if (space_.pressure_pinned()) subtract_weighted_mean(p, weights_);
    return p;
  }

 private:
  const TaylorHoodSpace& space_;
  NonlinearForm form_;
  VectorFunction forcing_;
  LinearOperators ops_;
  SparseMatrix sys_;
  Vector weights_;
  SparseLU lu_;
};

// Drag of reconstructed ROM fields, from step 1 on (the scheme's time
// derivative is needed). Entry n corresponds to fields[n + 1].
inline Vector rom_drag_series(const TaylorHoodSpace& space, const std::vector<Vector>& fields, double dt,
                              TimeScheme scheme, double nu, NonlinearForm form, int label) {
  PressureRecovery rec(space, nu, form);
  Vector drag;
  for (std::size_t n = 1; n < fields.size(); ++n) {
    const TimeCoefficients c = time_coefficients(scheme, n - 1);
    Vector dudt(space.velocity_dofs());
    for (std::size_t i = 0; i < dudt.size(); ++i)
      dudt[i] = (c.alpha * fields[n][i] - c.beta * fields[n - 1][i] + (c.gamma != 0.0 ? c.gamma * fields[n - 2][i] : 0.0)) / dt;
    const Vector p = rec.pressure(fields[n], dudt, 0.0);
    drag.push_back(drag_coefficient(space, fields[n], p, label, nu));
  }
  return drag;
}

}  // namespace nsrom
