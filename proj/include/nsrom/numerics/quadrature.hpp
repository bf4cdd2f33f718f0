#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nsrom/errors.hpp"

namespace nsrom {

// A point of a rule on the reference triangle (0,0), (1,0), (0,1), stored in
// barycentric coordinates. Reference coordinates are (xi, eta) = (b[1], b[2]).
struct QuadraturePoint {
  std::array<double, 3> barycentric;
  double weight;

  double xi() const { return barycentric[1]; }
  double eta() const { return barycentric[2]; }
};

struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  int degree = 0;  // highest total degree integrated exactly

  std::size_t size() const { return points.size(); }
};

// Rules on the reference triangle; weights sum to its area 1/2.
// Requests for degree 3..5 all return the 7-point degree-5 rule, which is
// the rule every assembly routine uses.
inline QuadratureRule triangle_quadrature(int degree) {
  if (degree < 0 || degree > 5)
    throw PreconditionError("triangle_quadrature: unsupported degree " + std::to_string(degree) + " (max 5)");
  QuadratureRule rule;
  if (degree <= 1) {
    rule.degree = 1;
    rule.points = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.5}};
    return rule;
  }
  if (degree == 2) {
    rule.degree = 2;
    const double a = 2.0 / 3.0, b = 1.0 / 6.0, w = 1.0 / 6.0;
    rule.points = {{{a, b, b}, w}, {{b, a, b}, w}, {{b, b, a}, w}};
    return rule;
  }
  // Radon's 7-point rule.
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
  const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
  const double w0 = 9.0 / 80.0;
  const double w1 = (155.0 - s15) / 2400.0;
  const double w2 = (155.0 + s15) / 2400.0;
  rule.degree = 5;
  rule.points = {
      {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, w0},
      {{b1, a1, a1}, w1}, {{a1, b1, a1}, w1}, {{a1, a1, b1}, w1},
      {{b2, a2, a2}, w2}, {{a2, b2, a2}, w2}, {{a2, a2, b2}, w2},
  };
  return rule;
}

// 3-point Gauss-Legendre rule on [0, 1] (exact to degree 5), used on edges.
struct LineQuadrature {
  std::array<double, 3> points;
  std::array<double, 3> weights;
};

inline LineQuadrature gauss3_unit_interval() {
  const double d = 0.5 * std::sqrt(0.6);
  return {{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
}

}  // namespace nsrom
