#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "nsrom/errors.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/mesh.hpp"

namespace nsrom {

enum class Problem { kelvin_helmholtz, cylinder_channel, taylor_green, custom };

inline std::string to_string(Problem p) {
  switch (p) {
    case Problem::kelvin_helmholtz: return "kelvin_helmholtz";
    case Problem::cylinder_channel: return "cylinder_channel";
    case Problem::taylor_green: return "taylor_green";
    case Problem::custom: return "custom";
  }
  return "?";
}

inline Problem parse_problem(std::string_view s) {
  for (Problem p : {Problem::kelvin_helmholtz, Problem::cylinder_channel, Problem::taylor_green, Problem::custom})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown problem '" + std::string(s) + "'");
}

namespace kh {

inline constexpr double shear_rate = 28.0;
inline constexpr double amplitude = 1e-3;

inline double nu_for_reynolds(double re) { return 1.0 / (shear_rate * re); }

// Stream-function perturbation psi = exp(-28^2 (y - 1/2)^2) (cos 8 pi x + cos 20 pi x).
inline std::array<double, 2> initial_velocity(double x, double y) {
  const double pi = std::numbers::pi;
  const double dy = y - 0.5;
  const double gauss = std::exp(-shear_rate * shear_rate * dy * dy);
  const double waves = std::cos(8 * pi * x) + std::cos(20 * pi * x);
  const double dpsi_dy = -2.0 * shear_rate * shear_rate * dy * gauss * waves;
  const double dpsi_dx = gauss * (-8 * pi * std::sin(8 * pi * x) - 20 * pi * std::sin(20 * pi * x));
  return {std::tanh(shear_rate * (2.0 * y - 1.0)) + amplitude * dpsi_dy, -amplitude * dpsi_dx};
}

// Unit square, periodic in x, no penetration and free slip on top/bottom.
inline Mesh mesh(std::size_t n, Diagonal diagonal = Diagonal::alternating) {
  return identify_periodic(uniform_rect_mesh(n, n, 1.0, 1.0, diagonal), Axis::x);
}

inline BoundarySpec boundary() {
  return {{boundary_label::bottom, BoundaryCondition::no_penetration()},
          {boundary_label::top, BoundaryCondition::no_penetration()},
          {boundary_label::left, BoundaryCondition::periodic()},
          {boundary_label::right, BoundaryCondition::periodic()}};
}

}  // namespace kh

namespace taylor_green {

// Vortex with wavenumber k; k = 2 pi makes it 1-periodic on the unit square.
struct Solution {
  double k = 2.0 * std::numbers::pi;
  double nu = 0.01;

  double decay(double t) const { return std::exp(-2.0 * k * k * nu * t); }

  std::array<double, 2> velocity(double x, double y, double t) const {
    const double d = decay(t);
    return {-std::cos(k * x) * std::sin(k * y) * d, std::sin(k * x) * std::cos(k * y) * d};
  }

  // g[a][b] = d u_a / d x_b
  std::array<std::array<double, 2>, 2> gradient(double x, double y, double t) const {
    const double d = decay(t);
    return {{{k * std::sin(k * x) * std::sin(k * y) * d, -k * std::cos(k * x) * std::cos(k * y) * d},
             {k * std::cos(k * x) * std::cos(k * y) * d, -k * std::sin(k * x) * std::sin(k * y) * d}}};
  }

  double pressure(double x, double y, double t) const {
    return -0.25 * (std::cos(2 * k * x) + std::cos(2 * k * y)) * decay(2 * t);
  }
};

inline Mesh mesh(std::size_t n) {
  return identify_periodic(identify_periodic(uniform_rect_mesh(n, n), Axis::x), Axis::y);
}

inline BoundarySpec boundary() {
  BoundarySpec spec;
  for (int label : {boundary_label::bottom, boundary_label::right, boundary_label::top, boundary_label::left})
    spec[label] = BoundaryCondition::periodic();
  return spec;
}

}  // namespace taylor_green

namespace cylinder {

inline constexpr double length = 2.2;
inline constexpr double height = 0.41;
inline constexpr double radius = 0.05;
inline constexpr double center_x = 0.2;
inline constexpr double center_y = 0.2;

inline std::array<double, 2> inflow(double, double y, double) {
  return {6.0 / (height * height) * y * (height - y), 0.0};
}

inline BoundarySpec boundary() {
  return {{boundary_label::bottom, BoundaryCondition::no_slip()},
          {boundary_label::top, BoundaryCondition::no_slip()},
          {boundary_label::cylinder, BoundaryCondition::no_slip()},
          {boundary_label::left, BoundaryCondition::velocity(inflow)},
          {boundary_label::right, BoundaryCondition::natural()}};
}

}  // namespace cylinder

// Nodal interpolant of the problem's initial velocity. The cylinder starts
// from rest with its boundary values applied.
inline Vector build_initial_condition(Problem problem, const TaylorHoodSpace& space, double nu = 0.01,
                                      const VectorFunction& custom = {}) {
  Vector u;
  switch (problem) {
    case Problem::kelvin_helmholtz:
      u = space.interpolate([](double x, double y, double) { return kh::initial_velocity(x, y); });
      break;
    case Problem::taylor_green: {
      const taylor_green::Solution s{2.0 * std::numbers::pi, nu};
      u = space.interpolate([&s](double x, double y, double t) { return s.velocity(x, y, t); });
      break;
    }
    case Problem::cylinder_channel:
      u.assign(space.velocity_dofs(), 0.0);
      break;
    case Problem::custom:
      if (!custom) throw ConfigError("custom problem needs an initial velocity function");
      u = space.interpolate(custom);
      break;
  }
  space.apply_essential_values(u, 0.0);
  return u;
}

}  // namespace nsrom
