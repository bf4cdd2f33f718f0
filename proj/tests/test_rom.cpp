#include <gtest/gtest.h>

#include <random>

#include "nsrom/diagnostics.hpp"
#include "nsrom/fom.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/problems.hpp"
#include "nsrom/rom.hpp"
#include "support/oracles.hpp"

using namespace nsrom;

namespace {

const double kh_nu = kh::nu_for_reynolds(100);

const TaylorHoodSpace& kh_space() {
  static const TaylorHoodSpace space(kh::mesh(8), kh::boundary());
  return space;
}

const FomRun& kh_run() {
  static const FomRun run = [] {
    FomConfig cfg;
    cfg.nu = kh_nu;
    cfg.dt = 0.02;
    cfg.t_end = 0.3;
    cfg.scheme = TimeScheme::backward_euler;
    cfg.snapshot_end = cfg.t_end;
    return run_fom(kh_space(), cfg, build_initial_condition(Problem::kelvin_helmholtz, kh_space(), cfg.nu), true);
  }();
  return run;
}

PodBasis kh_basis(Centering c = Centering::none, double cutoff = 1e-12) {
  return build_pod_basis(kh_space(), kh_run().snapshots, {c, cutoff});
}

}  // namespace

TEST(RomOperators, TensorEntriesMatchIndependentQuadrature) {
  const PodBasis b = kh_basis();
  const std::size_t r = 4;
  for (NonlinearForm f : all_forms) {
    const RomOperators ops = assemble_rom_operators(kh_space(), b, r, f, kh_nu);
    double scale = 0.0;
    for (double t : ops.t) scale = std::max(scale, std::abs(t));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = 0; k < r; ++k)
          EXPECT_NEAR(ops.tensor(i, j, k), oracle::ref_trilinear(kh_space(), f, b.modes[j], b.modes[k], b.modes[i]),
                      1e-10 * scale)
              << to_string(f) << " " << i << j << k;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        EXPECT_NEAR(ops.a(i, j), kh_nu * oracle::grad_inner(kh_space(), b.modes[i], b.modes[j]), 1e-10 * ops.a(0, 0));
  }
}

TEST(RomOperators, MeanTermsMatchIndependentQuadrature) {
  const PodBasis b = kh_basis(Centering::mean);
  const std::size_t r = 3;
  const RomOperators ops = assemble_rom_operators(kh_space(), b, r, NonlinearForm::emac, kh_nu);
  const Vector& m = b.mean;
  for (std::size_t i = 0; i < r; ++i) {
    const double c = oracle::ref_trilinear(kh_space(), NonlinearForm::emac, m, m, b.modes[i]) +
                     kh_nu * oracle::grad_inner(kh_space(), m, b.modes[i]);
    EXPECT_NEAR(ops.c[i], c, 1e-10 * (std::abs(c) + 1e-3));
    for (std::size_t j = 0; j < r; ++j) {
      const double l1 = oracle::ref_trilinear(kh_space(), NonlinearForm::emac, m, b.modes[j], b.modes[i]);
      const double l2 = oracle::ref_trilinear(kh_space(), NonlinearForm::emac, b.modes[j], m, b.modes[i]);
      EXPECT_NEAR(ops.l1(i, j), l1, 1e-10 * (std::abs(l1) + 1e-2));
      EXPECT_NEAR(ops.l2(i, j), l2, 1e-10 * (std::abs(l2) + 1e-2));
    }
  }
}

TEST(RomOperators, ContractionMatchesTrilinearOfReconstruction) {
  const PodBasis b = kh_basis();
  const std::size_t r = 5;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> dist;
  Vector a(r);
  for (double& x : a) x = dist(rng);
  const Vector u = reconstruct_field(b, a);
  for (NonlinearForm f : all_forms) {
    const RomOperators ops = assemble_rom_operators(kh_space(), b, r, f, kh_nu);
    const Vector n = ops.nonlinear(a);
    for (std::size_t i = 0; i < r; ++i) {
      const double ref = oracle::ref_trilinear(kh_space(), f, u, u, b.modes[i]);
      EXPECT_NEAR(n[i], ref, 1e-10 * (norm_inf(n) + 1e-12)) << to_string(f);
    }
  }
}

TEST(RomOperators, EnergyConservingFormsGiveZeroPower) {
  const PodBasis b = kh_basis();
  const std::size_t r = b.rank();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> dist;
  for (NonlinearForm f : {NonlinearForm::skew, NonlinearForm::emac, NonlinearForm::rotational}) {
    const RomOperators ops = assemble_rom_operators(kh_space(), b, r, f, kh_nu);
    for (int trial = 0; trial < 3; ++trial) {
      Vector a(r);
      for (double& x : a) x = dist(rng);
      const Vector n = ops.nonlinear(a);
      double scale = 0.0;
      for (std::size_t i = 0; i < r; ++i) scale += std::abs(a[i] * n[i]);
      EXPECT_LE(std::abs(dot(a, n)), 1e-12 * scale + 1e-14) << to_string(f);
    }
  }
}

TEST(RomStep, JacobianMatchesCentralDifferences) {
  const PodBasis b = kh_basis(Centering::mean);
  const std::size_t r = 4;
  const RomOperators ops = assemble_rom_operators(kh_space(), b, r, NonlinearForm::convective, kh_nu);
  const Vector a{0.3, -0.1, 0.2, 0.05}, an{0.25, -0.1, 0.1, 0.0}, anm1{0.2, 0.0, 0.1, 0.0};
  const TimeCoefficients c = time_coefficients(TimeScheme::bdf2, 1);
  DenseMatrix jac;
  rom_step_residual(ops, a, an, anm1, c, 0.01, &jac);
  const double h = 1e-4;
  for (std::size_t j = 0; j < r; ++j) {
    Vector ap = a, am = a;
    ap[j] += h;
    am[j] -= h;
    const Vector d = (1.0 / (2 * h)) * (rom_step_residual(ops, ap, an, anm1, c, 0.01) - rom_step_residual(ops, am, an, anm1, c, 0.01));
    // quadratic residual: central differences are exact up to rounding
    for (std::size_t i = 0; i < r; ++i) EXPECT_NEAR(jac(i, j), d[i], 1e-7 * (1.0 + std::abs(jac(i, j))));
  }
}

TEST(RunRom, SingleModePureDecay) {
  // one mode, skew form: b(psi, psi, psi) = 0, so backward Euler gives
  // a^{n+1} = a^n / (1 + dt nu |psi|_1^2)
  const PodBasis b = kh_basis();
  const RomOperators ops = assemble_rom_operators(kh_space(), b, 1, NonlinearForm::skew, kh_nu);
  const double lambda = kh_nu * oracle::grad_inner(kh_space(), b.modes[0], b.modes[0]);
  RomSettings s;
  s.dt = 0.05;
  s.t_end = 1.0;
  s.scheme = TimeScheme::backward_euler;
  const RomTrajectory tr = run_rom(ops, Vector{2.0}, s);
  ASSERT_EQ(tr.size(), 21u);
  double expect = 2.0;
  for (std::size_t n = 1; n < tr.size(); ++n) {
    expect /= 1.0 + s.dt * lambda;
    EXPECT_NEAR(tr.coefficients[n][0], expect, 1e-12);
    EXPECT_NEAR(tr.times[n], n * s.dt, 1e-12);
  }
}

TEST(RunRom, ZeroStateStaysZero) {
  const PodBasis b = kh_basis();
  const RomOperators ops = assemble_rom_operators(kh_space(), b, 3, NonlinearForm::emac, kh_nu);
  RomSettings s;
  s.dt = 0.1;
  s.t_end = 0.5;
  const RomTrajectory tr = run_rom(ops, Vector(3, 0.0), s);
  for (std::size_t n = 0; n < tr.size(); ++n) EXPECT_EQ(norm_inf(tr.coefficients[n]), 0.0);
  EXPECT_EQ(tr.newton_iterations[1], 1);
}

TEST(RunRom, FullRankConsistentRomReproducesSnapshots) {
  const PodBasis b = kh_basis(Centering::none, 1e-20);
  const std::size_t r = b.rank();
  const RomOperators ops = assemble_rom_operators(kh_space(), b, r, NonlinearForm::skew, kh_nu);
  RomSettings s;
  s.dt = 0.02;
  s.t_end = 0.3;
  s.scheme = TimeScheme::backward_euler;
  const SnapshotSet& snaps = kh_run().snapshots;
  const RomTrajectory tr = run_rom(ops, project_field(b, r, snaps.fields[0]), s);
  const std::vector<Vector> w = reconstruct_trajectory(b, tr);
  ASSERT_EQ(w.size(), snaps.size());
  double err = 0.0, scale = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    err = std::max(err, std::sqrt(oracle::l2_inner(kh_space(), w[n] - snaps.fields[n], w[n] - snaps.fields[n])));
    scale = std::max(scale, std::sqrt(oracle::l2_inner(kh_space(), snaps.fields[n], snaps.fields[n])));
  }
  EXPECT_LE(err, 1e-6 * scale);
}

TEST(RunRom, RejectsMismatchedInput) {
  const PodBasis b = kh_basis();
  EXPECT_THROW(assemble_rom_operators(kh_space(), b, b.rank() + 1, NonlinearForm::skew, kh_nu), PreconditionError);
  const RomOperators ops = assemble_rom_operators(kh_space(), b, 2, NonlinearForm::skew, kh_nu);
  EXPECT_THROW(run_rom(ops, Vector(3, 0.0), {}), PreconditionError);
}

TEST(PressureRecovery, FomStateGivesFomPressure) {
  const FomRun& run = kh_run();
  const PressureRecovery rec(kh_space(), kh_nu, NonlinearForm::skew);
  for (std::size_t n : {1u, 5u, 15u}) {
    const FomState& s = run.trajectory[n];
    const Vector dudt = (1.0 / 0.02) * (s.u - run.trajectory[n - 1].u);
    const Vector p = rec.pressure(s.u, dudt, s.time);
    EXPECT_LE(norm_inf(p - s.p), 1e-8 * norm_inf(s.p)) << "step " << n;
  }
}
