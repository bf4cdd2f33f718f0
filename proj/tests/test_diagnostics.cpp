#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsrom/diagnostics.hpp"
#include "nsrom/problems.hpp"
#include "support/oracles.hpp"

using namespace nsrom;

namespace {

const TaylorHoodSpace& cylinder_space() {
  static const TaylorHoodSpace space(read_triangle_mesh_files("data/meshes/cylinder"), cylinder::boundary());
  return space;
}

// Channel area minus the meshed area: the polygonal hole.
double hole_area(const Mesh& mesh) {
  double meshed = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) meshed += mesh.signed_area(t);
  return cylinder::length * cylinder::height - meshed;
}

}  // namespace

TEST(Drag, ConstantPressureGivesZero) {
  const TaylorHoodSpace& s = cylinder_space();
  const Vector u(s.velocity_dofs(), 0.0);
  const Vector p(s.pressure_dofs(), 1.0);
  EXPECT_NEAR(drag_coefficient(s, u, p, boundary_label::cylinder, 0.001), 0.0, 1e-13);
}

TEST(Drag, LinearPressureGivesMinusTwentyHoleArea) {
  const TaylorHoodSpace& s = cylinder_space();
  const double area = hole_area(s.mesh());
  EXPECT_NEAR(area, std::numbers::pi * cylinder::radius * cylinder::radius, 0.02 * area);
  const Vector u(s.velocity_dofs(), 0.0);
  const Vector p = s.interpolate_pressure([](double x, double) { return x; });
  EXPECT_NEAR(drag_coefficient(s, u, p, boundary_label::cylinder, 0.001), -20.0 * area, 1e-11);
  // a y-gradient exerts no streamwise force
  const Vector py = s.interpolate_pressure([](double, double y) { return y; });
  EXPECT_NEAR(drag_coefficient(s, u, py, boundary_label::cylinder, 0.001), 0.0, 1e-12);
}

TEST(Drag, ViscousTermMatchesEdgeQuadrature) {
  const TaylorHoodSpace& s = cylinder_space();
  const double nu = 0.3;
  // quadratic field: the P2 interpolant is exact
  const auto grad = [](double x, double y) {
    return std::array<std::array<double, 2>, 2>{{{0.0, 2.0 * y}, {2.0 * x, 0.0}}};
  };
  const Vector u = s.interpolate([](double x, double y, double) { return std::array<double, 2>{y * y, x * x}; });
  const Vector p(s.pressure_dofs(), 0.0);
  const auto gl = oracle::gauss_legendre(4);
  double ref = 0.0;
  for (const BoundaryEdge& e : s.mesh().boundary_edges) {
    if (e.label != boundary_label::cylinder) continue;
    const Point a = s.mesh().vertices[e.vertices[0]], b = s.mesh().vertices[e.vertices[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    std::array<double, 2> n{(b.y - a.y) / len, -(b.x - a.x) / len};
    // orient away from the obstacle center, into the fluid
    if (n[0] * (0.5 * (a.x + b.x) - cylinder::center_x) + n[1] * (0.5 * (a.y + b.y) - cylinder::center_y) < 0)
      n = {-n[0], -n[1]};
    const std::array<double, 2> tan{n[1], -n[0]};
    for (std::size_t g = 0; g < gl.x.size(); ++g) {
      const double s01 = gl.x[g];
      const auto G = grad(a.x + s01 * (b.x - a.x), a.y + s01 * (b.y - a.y));
      double dut = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) dut += tan[i] * G[i][j] * n[j];
      ref += gl.w[g] * len * nu * dut * n[1];
    }
  }
  EXPECT_NEAR(drag_coefficient(s, u, p, boundary_label::cylinder, nu), 20.0 * ref, 1e-12);
}

TEST(Drag, UnknownLabelIsConfigError) {
  const TaylorHoodSpace s(kh::mesh(4), kh::boundary());
  EXPECT_THROW(drag_coefficient(s, Vector(s.velocity_dofs(), 0.0), Vector(s.pressure_dofs(), 0.0), 5, 1.0), ConfigError);
}

TEST(TimeNorms, DiscreteNorms) {
  const Vector v{3.0, 4.0};
  EXPECT_DOUBLE_EQ(discrete_time_norm(v, 1.0, 2), 5.0);
  EXPECT_DOUBLE_EQ(discrete_time_norm(v, 0.25, 2), 2.5);
  EXPECT_DOUBLE_EQ(discrete_time_norm(v, 1.0, 1), 7.0);
  EXPECT_DOUBLE_EQ(discrete_time_norm(v, 1.0, time_norm_inf), 4.0);
  EXPECT_THROW(discrete_time_norm(v, 1.0, 3), PreconditionError);
}

TEST(TrajectoryError, IdenticalTrajectoriesGiveZero) {
  const TaylorHoodSpace s(taylor_green::mesh(4), taylor_green::boundary());
  const taylor_green::Solution tg;
  std::vector<Vector> f;
  Vector t;
  for (int n = 0; n < 4; ++n) {
    t.push_back(0.1 * n);
    f.push_back(s.interpolate([&](double x, double y, double tt) { return tg.velocity(x, y, tt); }, 0.1 * n));
  }
  const TrajectoryError e = trajectory_error(s, f, t, f, t, 0.01);
  EXPECT_EQ(e.linf_l2, 0.0);
  EXPECT_EQ(e.l2_h1, 0.0);
  EXPECT_NEAR(e.c_u, field_norms(s, f[0]).h1_semi, 1e-14);
  EXPECT_EQ(e.div_series.values.size(), 4u);
  Vector shifted = t;
  shifted[2] += 0.01;
  EXPECT_THROW(trajectory_error(s, f, t, f, shifted, 0.01), PreconditionError);
}

TEST(TrajectoryError, ConstantOffsetGivesItsNorm) {
  const TaylorHoodSpace s(taylor_green::mesh(4), taylor_green::boundary());
  const Vector zero(s.velocity_dofs(), 0.0);
  const Vector one = s.interpolate([](double, double, double) { return std::array<double, 2>{0.0, 2.0}; });
  const std::vector<Vector> a{zero, zero}, b{one, one};
  const TrajectoryError e = trajectory_error(s, a, {0.0, 0.5}, b, {0.0, 0.5}, 1.0);
  EXPECT_NEAR(e.linf_l2, 2.0, 1e-13);  // unit-area domain
  EXPECT_NEAR(e.l2_h1, 0.0, 1e-20);
}

TEST(EnergyEnstrophy, KelvinHelmholtzInitialState) {
  const TaylorHoodSpace s(kh::mesh(8), kh::boundary());
  const Vector u = build_initial_condition(Problem::kelvin_helmholtz, s);
  const EnergyEnstrophy e = energy_enstrophy(s, u);
  EXPECT_NEAR(e.energy, 0.5 * oracle::l2_inner(s, u, u), 1e-13);
  const double curl2 = oracle::integrate_fields(s, {&u}, [](const std::vector<oracle::FieldPoint>& f) {
    const double w = f[0].g[1][0] - f[0].g[0][1];
    return w * w;
  });
  EXPECT_NEAR(e.enstrophy, 0.5 * curl2, 1e-10 * curl2);
}

TEST(H1SemiError, InterpolantConvergesAtSecondOrder) {
  const taylor_green::Solution tg;
  double prev = 0.0;
  for (std::size_t n : {8, 16}) {
    const TaylorHoodSpace s(taylor_green::mesh(n), taylor_green::boundary());
    const Vector u = s.interpolate([&](double x, double y, double t) { return tg.velocity(x, y, t); });
    const double err = h1_semi_error(s, u, [&](double x, double y) { return tg.gradient(x, y, 0.0); });
    if (prev > 0) {
      EXPECT_NEAR(std::log2(prev / err), 2.0, 0.15);
    }
    prev = err;
  }
}
