#include <gtest/gtest.h>

#include <random>

#include "nsrom/numerics/dense.hpp"
#include "nsrom/numerics/quadrature.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "support/oracles.hpp"

using namespace nsrom;

namespace {

double integrate_monomial(const QuadratureRule& rule, int a, int b) {
  double s = 0.0;
  for (const auto& p : rule.points) s += p.weight * std::pow(p.xi(), a) * std::pow(p.eta(), b);
  return s;
}

DenseMatrix random_gram(std::size_t dofs, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  DenseMatrix x(dofs, count);
  for (std::size_t i = 0; i < dofs; ++i)
    for (std::size_t j = 0; j < count; ++j) x(i, j) = dist(rng);
  return x.transpose() * x;
}

}  // namespace

TEST(SymEig, IdentityHasUnitEigenvalues) {
  const SymEig e = sym_eig(DenseMatrix::identity(3));
  for (double v : e.values) EXPECT_NEAR(v, 1.0, 1e-14);
  const DenseMatrix vtv = e.vectors.transpose() * e.vectors;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-14);
}

TEST(SymEig, TwoByTwoByHand) {
  DenseMatrix m(2, 2);
  m(0, 0) = 2;
  m(0, 1) = 1;
  m(1, 0) = 1;
  m(1, 1) = 2;
  const SymEig e = sym_eig(m);
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(e.vectors(0, 0), s, 1e-14);
  EXPECT_NEAR(e.vectors(1, 0), s, 1e-14);
  // largest-magnitude entry positive: the tie resolves to the first entry
  EXPECT_NEAR(e.vectors(0, 1), s, 1e-14);
  EXPECT_NEAR(e.vectors(1, 1), -s, 1e-14);
}

TEST(SymEig, GramMatchesPowerIteration) {
  const DenseMatrix g = random_gram(30, 4, 11);
  const SymEig e = sym_eig(g);
  const auto ref = oracle::power_eigenvalues(g, 4);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(e.values[k], ref[k], 1e-9 * ref[k]);
}

TEST(SymEig, PostconditionsOnRandomMatrix) {
  const DenseMatrix g = random_gram(40, 25, 3);
  const SymEig e = sym_eig(g);
  const double nrm = g.frobenius_norm();
  double trace = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < g.rows(); ++k) {
    trace += g(k, k);
    sum += e.values[k];
    if (k > 0) {
      EXPECT_GE(e.values[k - 1], e.values[k]);
    }
    const Vector v = e.vectors.column(k);
    const Vector mv = g.multiply(v);
    EXPECT_LE(norm2(mv - e.values[k] * v), 1e-10 * nrm);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    EXPECT_GT(v[arg], 0.0);
  }
  EXPECT_NEAR(sum, trace, 1e-10 * std::abs(trace));
  const DenseMatrix vtv = e.vectors.transpose() * e.vectors;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.rows(); ++j) EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-10);
}

TEST(SymEig, RejectsBadInput) {
  EXPECT_THROW(sym_eig(DenseMatrix(2, 3)), PreconditionError);
  DenseMatrix m = DenseMatrix::identity(2);
  m(0, 1) = 1.0;
  EXPECT_THROW(sym_eig(m), PreconditionError);
}

TEST(JacobiSvd, RightVectorsMatchGramEigenvectors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  DenseMatrix x(12, 5);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 5; ++j) x(i, j) = dist(rng);
  const Svd s = jacobi_svd(x);
  const SymEig e = sym_eig(x.transpose() * x);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(s.values[k] * s.values[k], e.values[k], 1e-12 * e.values[0]);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.right(i, k), e.vectors(i, k), 1e-9);
  }
}

TEST(SolveSparse, IdentityReturnsRhs) {
  const Vector b{1.0, -2.0, 3.5};
  const Vector x = solve_sparse(SparseMatrix::identity(3), b);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
}

TEST(SolveSparse, TridiagonalByHand) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < 3; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i < 2) t.push_back({i, i + 1, -1.0});
  }
  const Vector x = solve_sparse(SparseMatrix::from_triplets(3, 3, t), Vector{1, 1, 1});
  EXPECT_NEAR(x[0], 1.5, 1e-14);
  EXPECT_NEAR(x[1], 2.0, 1e-14);
  EXPECT_NEAR(x[2], 1.5, 1e-14);
}

TEST(SolveSparse, RandomSpdResidualBound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-1, 1);
  const std::size_t n = 200;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 8.0});
    for (int k = 0; k < 3; ++k) {
      const std::size_t j = static_cast<std::size_t>(rng() % n);
      const double v = dist(rng);
      t.push_back({i, j, v});
      t.push_back({j, i, v});
    }
  }
  const SparseMatrix m = SparseMatrix::from_triplets(n, n, t);
  EXPECT_EQ(m.max_asymmetry(), 0.0);
  Vector b(n);
  for (double& v : b) v = dist(rng);
  const Vector x = solve_sparse(m, b);
  EXPECT_LE(norm2(m.multiply(x) - b), 1e-10 * (m.frobenius_norm() * norm2(x) + norm2(b)));
}

TEST(SolveSparse, SingularNamesPivotRow) {
  std::vector<Triplet> t{{0, 0, 1.0}, {1, 1, 0.0}, {2, 2, 1.0}};
  try {
    solve_sparse(SparseMatrix::from_triplets(3, 3, t), Vector{1, 1, 1});
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(SparseMatrix, DuplicatesSummedAndSorted) {
  const SparseMatrix m = SparseMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {1, 2, 4.0}});
  EXPECT_EQ(m.nonzeros(), 3u);
  EXPECT_DOUBLE_EQ(m.value(1, 2), 5.0);
  const auto cols = m.row_columns(1);
  EXPECT_LT(cols[0], cols[1]);
  EXPECT_THROW(const_cast<SparseMatrix&>(m).add(0, 0, 1.0), PreconditionError);
}

TEST(Quadrature, ReferenceAreaAndLowMoments) {
  const QuadratureRule r = triangle_quadrature(5);
  EXPECT_EQ(r.size(), 7u);
  EXPECT_NEAR(integrate_monomial(r, 0, 0), 0.5, 1e-14);
  EXPECT_NEAR(integrate_monomial(r, 1, 0), 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(integrate_monomial(r, 2, 2), 1.0 / 180.0, 1e-14);
}

TEST(Quadrature, ExactForAllMonomialsUpToDegree) {
  for (int degree = 0; degree <= 5; ++degree) {
    const QuadratureRule r = triangle_quadrature(degree);
    EXPECT_GE(r.degree, degree);
    double wsum = 0.0;
    for (const auto& p : r.points) wsum += p.weight;
    EXPECT_NEAR(wsum, 0.5, 1e-14);
    for (int a = 0; a <= r.degree; ++a)
      for (int b = 0; a + b <= r.degree; ++b)
        EXPECT_NEAR(integrate_monomial(r, a, b), oracle::monomial_integral(a, b), 1e-14) << a << "," << b;
  }
  // the attribute is not an overstatement: degree 6 is not exact
  const QuadratureRule r5 = triangle_quadrature(5);
  bool some_inexact = false;
  for (int a = 0; a <= 6; ++a)
    some_inexact |= std::abs(integrate_monomial(r5, a, 6 - a) - oracle::monomial_integral(a, 6 - a)) > 1e-12;
  EXPECT_TRUE(some_inexact);
}

TEST(Quadrature, UnsupportedDegreeThrows) {
  EXPECT_THROW(triangle_quadrature(6), PreconditionError);
  EXPECT_THROW(triangle_quadrature(-1), PreconditionError);
}

TEST(Quadrature, GaussLineExactToDegreeFive) {
  const LineQuadrature g = gauss3_unit_interval();
  for (int d = 0; d <= 5; ++d) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += g.weights[k] * std::pow(g.points[k], d);
    EXPECT_NEAR(s, 1.0 / (d + 1), 1e-15);
  }
}
