#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsrom/diagnostics.hpp"
#include "nsrom/errors.hpp"
#include "nsrom/fem/assembly.hpp"
#include "nsrom/fem/constraints.hpp"
#include "nsrom/fem/forms.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "nsrom/snapshots.hpp"

namespace nsrom {

enum class TimeScheme { backward_euler, bdf2 };

inline std::string to_string(TimeScheme s) { return s == TimeScheme::bdf2 ? "bdf2" : "backward_euler"; }

inline TimeScheme parse_scheme(std::string_view s) {
  if (s == "bdf2") return TimeScheme::bdf2;
  if (s == "backward_euler" || s == "be") return TimeScheme::backward_euler;
  throw ConfigError("unknown time scheme '" + std::string(s) + "' (expected backward_euler or bdf2)");
}

// du/dt ~ (alpha u^{n+1} - beta u^n + gamma u^{n-1}) / dt
struct TimeCoefficients {
  double alpha;
  double beta;
  double gamma;
};

// BDF2 takes one backward-Euler step first.
inline TimeCoefficients time_coefficients(TimeScheme scheme, std::size_t step) {
  if (scheme == TimeScheme::bdf2 && step > 0) return {1.5, 2.0, 0.5};
  return {1.0, 1.0, 0.0};
}

// Number of steps needed to reach t_end with step dt; t_end must be an
// integer multiple of dt up to rounding.
inline std::size_t step_count(double t_end, double dt) {
  const double n = std::round(t_end / dt);
  if (n < 1 || std::abs(n * dt - t_end) > 1e-9 * std::max(1.0, t_end))
    throw ConfigError("t_end must be a positive integer multiple of dt");
  return static_cast<std::size_t>(n);
}

struct NewtonSettings {
  double tolerance = 1e-10;
  int max_iterations = 20;
  double damping = 1.0;
};

struct FomConfig {
  double nu = 0.01;
  double dt = 0.01;
  double t_end = 1.0;
  NonlinearForm form = NonlinearForm::skew;
  TimeScheme scheme = TimeScheme::bdf2;
  VectorFunction forcing;  // empty means f = 0
  double snapshot_start = 0.0;
  double snapshot_end = std::numeric_limits<double>::infinity();
  std::size_t snapshot_stride = 1;
  NewtonSettings newton;
  std::optional<int> drag_label;  // record drag when set
  // Replace u0 by its discretely divergence-free projection before stepping.
  bool project_initial = true;

  void validate() const {
    if (!(dt > 0)) throw ConfigError("dt must be positive");
    if (!(t_end > 0)) throw ConfigError("t_end must be positive");
    if (!(nu > 0)) throw ConfigError("nu must be positive");
    if (snapshot_stride < 1) throw ConfigError("snapshot stride must be >= 1");
    if (snapshot_start < 0 || snapshot_start > t_end || snapshot_end < snapshot_start)
      throw ConfigError("snapshot window must lie inside [0, t_end]");
    if (newton.max_iterations < 1 || !(newton.tolerance > 0)) throw ConfigError("invalid Newton settings");
    step_count(t_end, dt);
  }
};

struct FomState {
  Vector u;
  Vector u_prev;  // u^{n-1}; empty before the first step
  Vector p;
  double time = 0.0;
  std::size_t step = 0;
  int newton_iterations = 0;
  double newton_residual = 0.0;
};

// Monolithic Newton solver for one implicit step. Holds the linear
// operators and the symbolic factorization of the system pattern.
// Integral of each P1 hat function; p . w / sum(w) is the mean pressure.
inline Vector pressure_mean_weights(const TaylorHoodSpace& space) {
  Vector w(space.pressure_dofs(), 0.0);
  for (std::size_t t = 0; t < space.element_count(); ++t)
    for (std::size_t q : space.element_pressure_dofs(t)) w[q] += space.element(t).area / 3.0;
  return w;
}

inline void subtract_weighted_mean(std::span<double> p, const Vector& w) {
  double total = 0.0, area = 0.0;
  for (std::size_t q = 0; q < p.size(); ++q) {
    total += w[q] * p[q];
    area += w[q];
  }
  const double mean = total / area;
  for (double& v : p) v -= mean;
}

class FomSolver {
 public:
  FomSolver(const TaylorHoodSpace& space, FomConfig config)
      : space_(space), config_(std::move(config)), ops_(assemble_linear_operators(space, config_.nu)),
        pattern_(space), lu_() {
    config_.validate();
    const std::size_t nu = space.velocity_dofs();
    const SparseMatrix& sys = pattern_.matrix();
    mass_values_.assign(sys.nonzeros(), 0.0);
    linear_values_.assign(sys.nonzeros(), 0.0);
    for (std::size_t i = 0; i < nu; ++i) {
      const auto mc = ops_.mass.row_columns(i);
      const auto mv = ops_.mass.row_values(i);
      const auto kv = ops_.stiffness.row_values(i);
      for (std::size_t k = 0; k < mc.size(); ++k) {
        const std::size_t pos = sys.find(i, mc[k]);
        mass_values_[pos] += mv[k];
        linear_values_[pos] += kv[k];
      }
    }
    for (std::size_t q = 0; q < space.pressure_dofs(); ++q) {
      const auto bc = ops_.divergence.row_columns(q);
      const auto bv = ops_.divergence.row_values(q);
      for (std::size_t k = 0; k < bc.size(); ++k) {
        linear_values_[sys.find(nu + q, bc[k])] -= bv[k];
        linear_values_[sys.find(bc[k], nu + q)] -= bv[k];
      }
    }
    pressure_weights_ = pressure_mean_weights(space);
  }

  const TaylorHoodSpace& space() const noexcept { return space_; }
  const FomConfig& config() const noexcept { return config_; }
  const LinearOperators& operators() const noexcept { return ops_; }

  // Load vector (f(t), phi_i); zero when no forcing is configured.
  Vector forcing(double t) const {
    Vector f(space_.velocity_dofs(), 0.0);
    if (!config_.forcing) return f;
    for (std::size_t e = 0; e < space_.element_count(); ++e) {
      const ElementData& el = space_.element(e);
      const auto d = space_.element_velocity_dofs(e);
      for (std::size_t q = 0; q < quadrature_points_per_element; ++q) {
        const auto fv = config_.forcing(el.x[q].x, el.x[q].y, t);
        for (int a = 0; a < 6; ++a)
          for (int c = 0; c < 2; ++c) f[d[2 * a + c]] += el.jxw[q] * fv[c] * el.p2[q].value[a];
      }
    }
    return f;
  }

  // Scheme residual [R_u; R_p] with R_u = M(alpha u - beta u^n + gamma u^{n-1})/dt
  // + K u + N(u) - B^T p - F and R_p = -B u. Constrained rows are not
  // zeroed here.
  Vector scheme_residual(std::span<const double> u, std::span<const double> p, std::span<const double> un,
                         std::span<const double> unm1, TimeCoefficients c, double t_next) const {
    const std::size_t nu = space_.velocity_dofs();
    Vector combo(nu);
    for (std::size_t i = 0; i < nu; ++i)
      combo[i] = (c.alpha * u[i] - c.beta * un[i] + (c.gamma != 0.0 ? c.gamma * unm1[i] : 0.0)) / config_.dt;
    Vector r = ops_.mass.multiply(combo);
    axpy(1.0, ops_.stiffness.multiply(u), r);
    axpy(1.0, nonlinear_residual(space_, config_.form, u), r);
    axpy(-1.0, ops_.divergence.multiply_transpose(p), r);
    axpy(-1.0, forcing(t_next), r);
    const Vector bu = ops_.divergence.multiply(u);
    r.resize(nu + space_.pressure_dofs());
    for (std::size_t q = 0; q < bu.size(); ++q) r[nu + q] = -bu[q];
    return r;
  }

  // Residual with constrained velocity rows and the pinned pressure row removed.
  Vector free_residual(std::span<const double> u, std::span<const double> p, std::span<const double> un,
                       std::span<const double> unm1, TimeCoefficients c, double t_next) const {
    Vector r = scheme_residual(u, p, un, unm1, c, t_next);
    mask_rows(r);
    return r;
  }

  // One implicit step from `state`. Throws StepError when Newton stalls.
  FomState advance(const FomState& state) {
    const std::size_t nu = space_.velocity_dofs();
    const std::size_t np = space_.pressure_dofs();
    const TimeCoefficients c = time_coefficients(config_.scheme, state.step);
    const double t_next = static_cast<double>(state.step + 1) * config_.dt;
    const Vector empty;
    const std::span<const double> unm1 = c.gamma != 0.0 ? std::span<const double>(state.u_prev) : std::span<const double>(empty);

    FomState next;
    next.u = state.u;
    space_.apply_essential_values(next.u, t_next);
    next.p = state.p.empty() ? Vector(np, 0.0) : state.p;
    next.u_prev = state.u;
    next.time = t_next;
    next.step = state.step + 1;

    SparseMatrix jac = pattern_.matrix();
    int iterations = 0;
    double res = 0.0;
    while (true) {
      Vector r = assemble_newton(next.u, next.p, state.u, unm1, c, t_next, jac);
      res = norm2(r);
      if (!std::isfinite(res))
        throw StepError("Newton residual is not finite; dt may be too large", next.step, res);
      if (iterations >= 1 && res <= config_.newton.tolerance) break;
      if (iterations >= config_.newton.max_iterations)
        throw StepError("Newton did not converge in " + std::to_string(iterations) + " iterations", next.step, res);
      if (!analyzed_) {
        lu_.analyze(jac);
        analyzed_ = true;
      }
      lu_.factorize(jac);
      for (double& v : r) v = -v;
      const Vector delta = lu_.solve(r);
      for (std::size_t i = 0; i < nu; ++i) next.u[i] += config_.newton.damping * delta[i];
      for (std::size_t q = 0; q < np; ++q) next.p[q] += config_.newton.damping * delta[nu + q];
      ++iterations;
    }
    if (space_.pressure_pinned()) remove_pressure_mean(next.p);
    next.newton_iterations = iterations;
    next.newton_residual = res;
    return next;
  }

  void remove_pressure_mean(Vector& p) const { subtract_weighted_mean(p, pressure_weights_); }

 private:
  void mask_rows(Vector& r) const {
    const std::size_t nu = space_.velocity_dofs();
    for (std::size_t i = 0; i < nu; ++i)
      if (space_.is_constrained(i)) r[i] = 0.0;
    if (space_.pressure_pinned()) r[nu + space_.pinned_pressure_dof()] = 0.0;
  }

  // Residual (masked) and Jacobian of the step system at (u, p). Constrained
  // velocity rows and the pinned pressure row become identity rows with zero
  // residual: u already carries its boundary values and the pinned pressure
  // value fixes the gauge.
  Vector assemble_newton(std::span<const double> u, std::span<const double> p, std::span<const double> un,
                         std::span<const double> unm1, TimeCoefficients c, double t_next, SparseMatrix& jac) const {
    const std::size_t nu = space_.velocity_dofs();
    auto jv = jac.values();
    const double s = c.alpha / config_.dt;
    for (std::size_t k = 0; k < jv.size(); ++k) jv[k] = linear_values_[k] + s * mass_values_[k];
    Vector r = scheme_residual(u, p, un, unm1, c, t_next);
    for (std::size_t e = 0; e < space_.element_count(); ++e) {
      const ElementNonlinear loc = element_nonlinear(space_, config_.form, u, e);
      const auto& pos = pattern_.velocity_block(e);
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) jv[pos[12 * i + j]] += loc.jacobian[i][j];
    }
    Vector zero_values(nu, 0.0);
    Vector dummy(r.size(), 0.0);
    apply_constraints(space_, jac, dummy, zero_values);
    mask_rows(r);
    return r;
  }

  const TaylorHoodSpace& space_;
  FomConfig config_;
  LinearOperators ops_;
  SystemPattern pattern_;
  SparseLU lu_;
  bool analyzed_ = false;
  Vector mass_values_;
  Vector linear_values_;
  Vector pressure_weights_;
};

// [M -B^T; -B 0] on the system pattern. Constrained velocity rows and the
// pinned pressure row are identity rows.
inline SparseMatrix mass_saddle_matrix(const TaylorHoodSpace& space, const LinearOperators& ops) {
  const std::size_t nu = space.velocity_dofs();
  const SystemPattern pattern(space);
  SparseMatrix sys = pattern.matrix();
  for (std::size_t i = 0; i < nu; ++i) {
    const auto mc = ops.mass.row_columns(i);
    const auto mv = ops.mass.row_values(i);
    for (std::size_t k = 0; k < mc.size(); ++k) sys.add(i, mc[k], mv[k]);
  }
  for (std::size_t q = 0; q < space.pressure_dofs(); ++q) {
    const auto bc = ops.divergence.row_columns(q);
    const auto bv = ops.divergence.row_values(q);
    for (std::size_t k = 0; k < bc.size(); ++k) {
      sys.add(nu + q, bc[k], -bv[k]);
      sys.add(bc[k], nu + q, -bv[k]);
    }
  }
  Vector rhs(sys.rows(), 0.0), values(nu, 0.0);
  apply_constraints(space, sys, rhs, values);
  return sys;
}

// M-orthogonal projection of u onto {w : B w = 0, w = u on constrained DOFs}.
inline Vector divergence_free_projection(const TaylorHoodSpace& space, const Vector& u) {
  require_on_space(space, u, "divergence_free_projection");
  const std::size_t nu = space.velocity_dofs();
  const LinearOperators ops = assemble_linear_operators(space, 1.0);
  Vector rhs = ops.mass.multiply(u);
  for (std::size_t i = 0; i < nu; ++i)
    if (space.is_constrained(i)) rhs[i] = u[i];
  rhs.resize(nu + space.pressure_dofs(), 0.0);
  Vector w = solve_sparse(mass_saddle_matrix(space, ops), rhs);
  w.resize(nu);
  return w;
}

struct FomScalars {
  Vector t, energy, enstrophy, div_error, drag;
};

struct FomRun {
  std::vector<FomState> trajectory;  // only kept when requested
  SnapshotSet snapshots;
  FomScalars scalars;
  FomState final_state;
};

namespace detail {

inline void record_scalars(FomScalars& s, const TaylorHoodSpace& space, const FomConfig& cfg, const FomState& st) {
  const FieldNorms n = field_norms(space, st.u);
  s.t.push_back(st.time);
  s.energy.push_back(0.5 * n.l2 * n.l2);
  s.enstrophy.push_back(0.5 * n.curl_l2 * n.curl_l2);
  s.div_error.push_back(n.div_l2);
  s.drag.push_back(cfg.drag_label && !st.p.empty()
                       ? drag_coefficient(space, st.u, st.p, *cfg.drag_label, cfg.nu)
                       : std::numeric_limits<double>::quiet_NaN());
}

}  // namespace detail

// Steps from u0 to t_end, recording scalars every step and snapshots in
// the configured window. keep_trajectory stores every state.
inline FomRun run_fom(const TaylorHoodSpace& space, const FomConfig& config, const Vector& u0,
                      bool keep_trajectory = false,
                      const std::function<void(const FomState&)>& on_step = {}) {
  config.validate();
  require_on_space(space, u0, "run_fom");
  FomSolver solver(space, config);
  const std::size_t steps = step_count(config.t_end, config.dt);
  const double eps = 1e-9 * config.dt;
  const auto first_snapshot = static_cast<std::size_t>(std::ceil(config.snapshot_start / config.dt - 1e-9));

  FomRun run;
  FomState state;
  state.u = config.project_initial ? divergence_free_projection(space, u0) : u0;
  state.p.assign(space.pressure_dofs(), 0.0);
  const auto record = [&](const FomState& s) {
    detail::record_scalars(run.scalars, space, config, s);
    if (s.time >= config.snapshot_start - eps && s.time <= config.snapshot_end + eps && s.step >= first_snapshot &&
        (s.step - first_snapshot) % config.snapshot_stride == 0)
      run.snapshots.add(s.time, s.u);
    if (keep_trajectory) run.trajectory.push_back(s);
    if (on_step) on_step(s);
  };
  record(state);
  for (std::size_t n = 0; n < steps; ++n) {
    state = solver.advance(state);
    record(state);
  }
  run.final_state = std::move(state);
  return run;
}

}  // namespace nsrom
