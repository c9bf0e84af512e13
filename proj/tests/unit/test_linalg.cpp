#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "ppapep/linalg.hpp"
#include "ppapep/random.hpp"

using ppapep::Matrix;
using ppapep::Vector;

TEST(SymmetricEigen, DiagonalAndEmpty) {
  Matrix d = Vector((Vector(3) << 3, -1, 2).finished()).asDiagonal();
  const auto e = ppapep::symmetric_eigen(d);
  EXPECT_DOUBLE_EQ(e.values[0], -1);
  EXPECT_DOUBLE_EQ(e.values[1], 2);
  EXPECT_DOUBLE_EQ(e.values[2], 3);
  EXPECT_EQ(ppapep::symmetric_eigenvalues(Matrix(0, 0)).size(), 0);
  EXPECT_DOUBLE_EQ(ppapep::symmetric_eigenvalues(Matrix(Matrix::Constant(1, 1, 4.0)))[0], 4.0);
}

TEST(SymmetricEigen, AgreesWithReferenceSolver) {
  ppapep::Xoshiro256 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.uniform_int(0, 24));
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
    a = ppapep::symmetrized(a);
    const auto mine = ppapep::symmetric_eigen(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    const double scale = 1.0 + a.norm();
    EXPECT_LE((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12 * scale);
    // A V = V diag(lambda) and V orthogonal
    EXPECT_LE((a * mine.vectors - mine.vectors * mine.values.asDiagonal()).norm(), 1e-11 * scale);
    EXPECT_LE((mine.vectors.transpose() * mine.vectors - Matrix::Identity(n, n)).norm(), 1e-12 * n);
  }
}

TEST(SymmetricEigen, RepeatedEigenvaluesAndRankOne) {
  Vector v = Vector::LinSpaced(6, 1.0, 6.0);
  const Matrix a = v * v.transpose();
  const auto vals = ppapep::symmetric_eigenvalues(a);
  EXPECT_NEAR(vals[5], v.squaredNorm(), 1e-12 * v.squaredNorm());
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(vals[k], 0.0, 1e-12 * v.squaredNorm());
  EXPECT_NEAR(ppapep::symmetric_eigenvalues(Matrix(Matrix::Identity(4, 4)))[0], 1.0, 1e-15);
}

TEST(SymmetricEigen, ExtendedPrecisionOverload) {
  ppapep::ExtMatrix a(2, 2);
  a << 2.0L, 1.0L, 1.0L, 2.0L;
  const auto vals = ppapep::symmetric_eigenvalues(a);
  EXPECT_NEAR(static_cast<double>(vals[0]), 1.0, 1e-18);
  EXPECT_NEAR(static_cast<double>(vals[1]), 3.0, 1e-18);
}

TEST(SpectralMap, SquareRootSquaresBack) {
  ppapep::Xoshiro256 rng(4);
  const Matrix b = ppapep::random_spd_matrix(rng, 5, 0.5);
  const Matrix r = ppapep::spectral_map(b, [](double x) { return std::sqrt(x); });
  EXPECT_LE((r * r - b).norm(), 1e-12 * b.norm());
}
