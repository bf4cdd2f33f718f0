#include <gtest/gtest.h>

#include <random>

#include "nsrom/fom.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/problems.hpp"
#include "support/oracles.hpp"

using namespace nsrom;

namespace {

SnapshotSet random_snapshots(const TaylorHoodSpace& s, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SnapshotSet set;
  for (std::size_t j = 0; j < m; ++j) set.add(static_cast<double>(j), oracle::random_field(s, rng));
  return set;
}

// Short KH run: the snapshots are genuine discretely divergence-free states.
const SnapshotSet& kh_snapshots() {
  static const SnapshotSet set = [] {
    const TaylorHoodSpace space(kh::mesh(8), kh::boundary());
    FomConfig cfg;
    cfg.nu = kh::nu_for_reynolds(100);
    cfg.dt = 0.02;
    cfg.t_end = 0.4;
    cfg.snapshot_end = cfg.t_end;
    return run_fom(space, cfg, build_initial_condition(Problem::kelvin_helmholtz, space, cfg.nu)).snapshots;
  }();
  return set;
}

const TaylorHoodSpace& kh_space() {
  static const TaylorHoodSpace space(kh::mesh(8), kh::boundary());
  return space;
}

}  // namespace

TEST(Pod, SingleSnapshotGivesNormalizedField) {
  const TaylorHoodSpace& s = kh_space();
  const SnapshotSet set = random_snapshots(s, 1, 3);
  const PodBasis b = build_pod_basis(s, set);
  ASSERT_EQ(b.rank(), 1u);
  const double n2 = oracle::l2_inner(s, set.fields[0], set.fields[0]);
  EXPECT_NEAR(b.eigenvalues[0], n2, 1e-12 * n2);
  const double scale = std::sqrt(n2);
  for (std::size_t i = 0; i < set.dofs(); ++i) EXPECT_NEAR(b.modes[0][i], set.fields[0][i] / scale, 1e-12);
}

TEST(Pod, TwoOrthogonalSnapshots) {
  const TaylorHoodSpace& s = kh_space();
  SnapshotSet set = random_snapshots(s, 2, 5);
  // make the second snapshot L2-orthogonal to the first
  Vector& v = set.fields[1];
  const Vector& u = set.fields[0];
  const double c = oracle::l2_inner(s, u, v) / oracle::l2_inner(s, u, u);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
  const double nu2 = oracle::l2_inner(s, u, u), nv2 = oracle::l2_inner(s, v, v);
  const PodBasis b = build_pod_basis(s, set);
  ASSERT_EQ(b.rank(), 2u);
  EXPECT_NEAR(b.eigenvalues[0], std::max(nu2, nv2) / 2, 1e-10 * nu2);
  EXPECT_NEAR(b.eigenvalues[1], std::min(nu2, nv2) / 2, 1e-10 * nu2);
}

TEST(Pod, EigenvaluesMatchExplicitGramMatrix) {
  const TaylorHoodSpace& s = kh_space();
  const SnapshotSet set = random_snapshots(s, 6, 11);
  const std::size_t m = set.size();
  DenseMatrix gram(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) gram(i, j) = oracle::l2_inner(s, set.fields[i], set.fields[j]) / m;
  const std::vector<double> ref = oracle::power_eigenvalues(gram, 3);
  const PodBasis b = build_pod_basis(s, set);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(b.eigenvalues[k], ref[k], 1e-8 * ref[0]);
}

TEST(Pod, ModesOrthonormalAndDivergenceFree) {
  const PodBasis b = build_pod_basis(kh_space(), kh_snapshots());
  const SparseMatrix div = assemble_linear_operators(kh_space(), 1.0).divergence;
  ASSERT_GE(b.rank(), 5u);
  for (std::size_t i = 0; i < b.rank(); ++i) {
    for (std::size_t j = 0; j <= i; ++j)
      EXPECT_NEAR(oracle::l2_inner(kh_space(), b.modes[i], b.modes[j]), i == j ? 1.0 : 0.0, 1e-10);
    // discretely divergence-free: (div psi, q) = 0 for every pressure hat q
    EXPECT_LT(norm_inf(div.multiply(b.modes[i])), 1e-8);
    EXPECT_NEAR(b.grad_norms[i], std::sqrt(oracle::grad_inner(kh_space(), b.modes[i], b.modes[i])), 1e-8 * b.grad_norms[i]);
  }
  for (std::size_t k = 1; k < b.rank(); ++k) EXPECT_LT(b.eigenvalues[k], b.eigenvalues[k - 1]);
}

TEST(Pod, TraceIdentity) {
  for (Centering c : {Centering::none, Centering::mean}) {
    const PodBasis b = build_pod_basis(kh_space(), kh_snapshots(), {c, 0.0});
    const SnapshotSet& set = kh_snapshots();
    Vector mean(set.dofs(), 0.0);
    if (c == Centering::mean)
      for (const Vector& u : set.fields)
        for (std::size_t i = 0; i < u.size(); ++i) mean[i] += u[i] / set.size();
    double energy = 0.0;
    for (const Vector& u : set.fields) {
      const Vector d = u - mean;
      energy += oracle::l2_inner(kh_space(), d, d) / set.size();
    }
    double sum = 0.0;
    for (double l : b.eigenvalues) sum += l;
    EXPECT_NEAR(sum, energy, 1e-10 * energy) << to_string(c);
  }
}

TEST(Pod, ProjectionErrorEqualityForEveryR) {
  for (Centering c : {Centering::none, Centering::mean}) {
    const PodBasis b = build_pod_basis(kh_space(), kh_snapshots(), {c});
    for (std::size_t r = 0; r <= b.rank(); ++r) {
      // independent left side: quadrature of the projection remainder
      double lhs = 0.0;
      for (const Vector& u : kh_snapshots().fields) {
        const Vector d = u - reconstruct_field(b, project_field(b, r, u));
        lhs += oracle::grad_inner(kh_space(), d, d) / kh_snapshots().size();
      }
      const ProjectionError e = pod_projection_error(kh_space(), b, kh_snapshots(), r);
      EXPECT_NEAR(e.lhs, lhs, 1e-9 * lhs + 1e-300);
      EXPECT_NEAR(e.lhs, e.rhs, 1e-8 * e.rhs) << to_string(c) << " r=" << r;
    }
  }
}

TEST(Pod, PythagorasAndIdempotence) {
  const PodBasis b = build_pod_basis(kh_space(), kh_snapshots());
  const std::size_t r = 3;
  const Vector& u = kh_snapshots().fields.back();
  const Vector a = project_field(b, r, u);
  const Vector pu = reconstruct_field(b, a);
  const Vector rest = u - pu;
  const double uu = oracle::l2_inner(kh_space(), u, u);
  EXPECT_NEAR(uu, oracle::l2_inner(kh_space(), pu, pu) + oracle::l2_inner(kh_space(), rest, rest), 1e-10 * uu);
  const Vector a2 = project_field(b, r, pu);
  for (std::size_t i = 0; i < r; ++i) EXPECT_NEAR(a2[i], a[i], 1e-12 * norm_inf(a));
}

TEST(Pod, SignFollowsLargestSnapshotCoefficient) {
  // (u_j, psi_k) is proportional to the Gram eigenvector entry w_k[j]
  const PodBasis b = build_pod_basis(kh_space(), kh_snapshots());
  for (std::size_t k = 0; k < b.rank(); ++k) {
    double best = 0.0;
    for (const Vector& u : kh_snapshots().fields) {
      const double a = oracle::l2_inner(kh_space(), u, b.modes[k]);
      if (std::abs(a) > std::abs(best)) best = a;
    }
    EXPECT_GT(best, 0.0) << "mode " << k;
  }
}

TEST(Pod, CenteredModesVanishOnConstrainedDofs) {
  const PodBasis b = build_pod_basis(kh_space(), kh_snapshots(), {Centering::mean});
  for (const Vector& m : b.modes)
    for (std::size_t i = 0; i < m.size(); ++i)
      if (kh_space().is_constrained(i)) {
        EXPECT_NEAR(m[i], 0.0, 1e-12);
      }
}

TEST(Pod, RejectsBadInput) {
  SnapshotSet zeros;
  zeros.add(0.0, Vector(kh_space().velocity_dofs(), 0.0));
  EXPECT_THROW(build_pod_basis(kh_space(), zeros), PreconditionError);
  const PodBasis b = build_pod_basis(kh_space(), kh_snapshots());
  EXPECT_THROW(project_field(b, b.rank() + 1, kh_snapshots().fields[0]), PreconditionError);
}
