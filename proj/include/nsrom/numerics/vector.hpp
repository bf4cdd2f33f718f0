#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nsrom/errors.hpp"

namespace nsrom {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  NSROM_REQUIRE(a.size() == b.size(), "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  NSROM_REQUIRE(x.size() == y.size(), "axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector operator-(const Vector& a, const Vector& b) {
  NSROM_REQUIRE(a.size() == b.size(), "vector difference: size mismatch");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline Vector operator+(const Vector& a, const Vector& b) {
  NSROM_REQUIRE(a.size() == b.size(), "vector sum: size mismatch");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline Vector operator*(double s, const Vector& a) {
  Vector c(a);
  for (double& v : c) v *= s;
  return c;
}

}  // namespace nsrom
