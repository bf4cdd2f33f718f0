#pragma once

// Fast self-checks behind `nsrom_cli verify`: form identities, Jacobians
// against finite differences, and a tiny fom -> pod -> rom round trip.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "nsrom/config.hpp"
#include "nsrom/fom.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/rom.hpp"

namespace nsrom {

struct VerifyCheck {
  std::string name;
  double value;
  double tolerance;
  bool pass() const { return std::isfinite(value) && value <= tolerance; }
};

namespace detail {

inline Vector random_homogeneous_field(const TaylorHoodSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector u(space.velocity_dofs());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = space.is_constrained(i) ? 0.0 : dist(rng);
  return u;
}

}  // namespace detail

inline std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed) {
  std::vector<VerifyCheck> out;
  std::mt19937_64 rng(seed);

  {
    const TaylorHoodSpace space(kh::mesh(8), kh::boundary());
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const Vector u = detail::random_homogeneous_field(space, rng), v = detail::random_homogeneous_field(space, rng);
      const double hu = field_norms(space, u).h1_semi, hv = field_norms(space, v).h1_semi;
      worst = std::max(worst, std::abs(trilinear_value(space, NonlinearForm::skew, u, v, v)) / (hu * hv * hv));
      worst = std::max(worst, std::abs(trilinear_value(space, NonlinearForm::rotational, u, v, v)) / (hu * hv * hv));
      worst = std::max(worst, std::abs(trilinear_value(space, NonlinearForm::emac, u, u, u)) / (hu * hu * hu));
    }
    out.push_back({"energy-conserving forms vanish", worst, 1e-11});
  }

  {
    const TaylorHoodSpace space(kh::mesh(4), kh::boundary());
    const Vector u = detail::random_homogeneous_field(space, rng), d = detail::random_homogeneous_field(space, rng);
    double worst = 0.0;
    for (NonlinearForm f : all_forms) {
      const Vector jd = nonlinear_residual_and_jacobian(space, f, u).jacobian.multiply(d);
      // N is quadratic, so the central difference is exact up to rounding.
      const double h = 1e-3;
      Vector up = u, um = u;
      axpy(h, d, up);
      axpy(-h, d, um);
      const Vector fd = (1.0 / (2 * h)) * (nonlinear_residual(space, f, up) - nonlinear_residual(space, f, um));
      worst = std::max(worst, norm_inf(fd - jd) / norm_inf(jd));
    }
    out.push_back({"jacobians match central differences", worst, 1e-8});
  }

  {
    const TaylorHoodSpace space(kh::mesh(8), kh::boundary());
    FomConfig fc;
    fc.nu = kh::nu_for_reynolds(100);
    fc.dt = 0.02;
    fc.t_end = 0.2;
    fc.scheme = TimeScheme::backward_euler;
    fc.snapshot_end = fc.t_end;
    const FomRun run = run_fom(space, fc, build_initial_condition(Problem::kelvin_helmholtz, space, fc.nu));
    const PodBasis basis = build_pod_basis(space, run.snapshots);
    const LinearOperators ops = assemble_linear_operators(space, 1.0);
    double ortho = 0.0;
    for (std::size_t i = 0; i < basis.rank(); ++i)
      for (std::size_t j = 0; j < basis.rank(); ++j)
        ortho = std::max(ortho, std::abs(ops.mass.bilinear(basis.modes[i], basis.modes[j]) - (i == j ? 1.0 : 0.0)));
    out.push_back({"POD modes orthonormal", ortho, 1e-10});
    double mismatch = 0.0;
    for (std::size_t r = 0; r < basis.rank(); ++r) {
      const ProjectionError e = pod_projection_error(space, basis, run.snapshots, r);
      mismatch = std::max(mismatch, std::abs(e.lhs - e.rhs) / e.rhs);
    }
    out.push_back({"POD projection-error equality", mismatch, 1e-8});

    PodOptions full;
    full.rank_cutoff = 1e-20;
    const PodBasis fb = build_pod_basis(space, run.snapshots, full);
    const std::size_t r = fb.rank();
    const RomOperators rops = assemble_rom_operators(space, fb, r, fc.form, fc.nu);
    RomSettings rs;
    rs.dt = fc.dt;
    rs.t_end = fc.t_end;
    rs.scheme = fc.scheme;
    const RomTrajectory traj = run_rom(rops, project_field(fb, r, run.snapshots.fields[0]), rs);
    const std::vector<Vector> w = reconstruct_trajectory(fb, traj);
    double err = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
      err = std::max(err, field_norms(space, w[n] - run.snapshots.fields[n]).l2);
      scale = std::max(scale, field_norms(space, run.snapshots.fields[n]).l2);
    }
    out.push_back({"full-rank ROM reproduces the snapshots", err / scale, 1e-6});
  }
  return out;
}

inline bool report_verify(const std::vector<VerifyCheck>& checks, std::ostream& os) {
  bool ok = true;
  for (const VerifyCheck& c : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%s %-42s %.3e (tol %.0e)", c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.value,
                  c.tolerance);
    os << line << "\n";
    ok = ok && c.pass();
  }
  return ok;
}

}  // namespace nsrom
