#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "npn/matrix.hpp"
#include "npn/simulation.hpp"
#include "oracles.hpp"

using namespace npn;

namespace {

double reconstruction_residual(const SymMatrix& a, const EigenDecomposition& eig) {
  return frobenius_distance(reconstruct(eig.eigenvectors, eig.eigenvalues).matrix(), a.matrix());
}

double orthogonality_residual(const Matrix& q) {
  return frobenius_distance(q.transpose() * q, Matrix::identity(q.rows()));
}

}  // namespace

TEST(SymMatrix, SymmetrizesOnConstruction) {
  const SymMatrix s(Matrix{{1.0, 2.0}, {4.0, 5.0}});
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
  EXPECT_THROW(SymMatrix(Matrix(2, 3)), Error);
  EXPECT_THROW(SymMatrix{Matrix{}}, Error);
}

TEST(CorrelationMatrix, RejectsBadDiagonalAndRange) {
  EXPECT_THROW(CorrelationMatrix(SymMatrix{{1.0, 0.2}, {0.2, 0.9}}), Error);
  EXPECT_THROW(CorrelationMatrix(SymMatrix{{1.0, 1.2}, {1.2, 1.0}}), Error);
  EXPECT_NO_THROW(CorrelationMatrix(SymMatrix{{1.0, -1.0}, {-1.0, 1.0}}));
}

TEST(CholeskyLogdet, Examples) {
  EXPECT_EQ(cholesky_logdet(SymMatrix::identity(3)), 0.0);
  EXPECT_NEAR(cholesky_logdet(SymMatrix{{1.0, 0.6}, {0.6, 1.0}}), -0.4462871026284195, 1e-12);
  try {
    cholesky_logdet(SymMatrix{{1.0, 1.0}, {1.0, 1.0}});
    FAIL() << "expected NotPositiveDefinite";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
  }
  EXPECT_THROW(cholesky_logdet(SymMatrix{{1.0, 2.0}, {2.0, 1.0}}), Error);
}

TEST(CholeskyLogdet, MatchesEliminationDeterminant) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    Rng r(t);
    const auto c = sample_correlation_wishart(6, r);
    EXPECT_NEAR(cholesky_logdet(c.sym()), std::log(oracle::determinant(c.sym().matrix())), 1e-9);
  }
}

TEST(SymEigen, DiagonalInput) {
  const auto eig = sym_eigen(SymMatrix{{3.0, 0.0}, {0.0, 1.0}});
  EXPECT_EQ(eig.eigenvalues[0], 3.0);
  EXPECT_EQ(eig.eigenvalues[1], 1.0);
  EXPECT_EQ(std::abs(eig.eigenvectors(0, 0)), 1.0);
  EXPECT_EQ(std::abs(eig.eigenvectors(1, 1)), 1.0);
  EXPECT_EQ(eig.eigenvectors(0, 1), 0.0);
}

TEST(SymEigen, TwoByTwoCharacteristicPolynomial) {
  for (double s : {-0.95, -0.3, 0.0, 0.25, 0.6, 0.999}) {
    const auto eig = sym_eigen(SymMatrix{{1.0, s}, {s, 1.0}});
    // Roots of (1 - l)^2 - s^2.
    EXPECT_NEAR(eig.eigenvalues[0], 1.0 + std::abs(s), 1e-14);
    EXPECT_NEAR(eig.eigenvalues[1], 1.0 - std::abs(s), 1e-14);
  }
}

TEST(SymEigen, RandomReconstructionAndOrthogonality) {
  std::mt19937_64 rng(3);
  for (std::size_t d : {1u, 2u, 5u, 8u, 25u, 40u}) {
    for (int t = 0; t < 10; ++t) {
      const SymMatrix a(oracle::random_symmetric(d, rng, 3.0));
      const auto eig = sym_eigen(a);
      EXPECT_LE(reconstruction_residual(a, eig), 1e-9 * std::max(1.0, frobenius_norm(a.matrix())));
      EXPECT_LE(orthogonality_residual(eig.eigenvectors), 1e-9);
      for (std::size_t i = 1; i < d; ++i) EXPECT_GE(eig.eigenvalues[i - 1], eig.eigenvalues[i]);
    }
  }
}

TEST(SymEigen, RepeatedEigenvalues) {
  const auto eig = sym_eigen(SymMatrix::identity(4));
  for (double v : eig.eigenvalues) EXPECT_EQ(v, 1.0);
  std::mt19937_64 rng(5);
  const Matrix q = oracle::random_orthogonal(6, rng);
  const SymMatrix a = reconstruct(q, std::vector<double>{2, 2, 2, -1, -1, 0.5});
  const auto e = sym_eigen(a);
  EXPECT_NEAR(e.eigenvalues[0], 2.0, 1e-12);
  EXPECT_NEAR(e.eigenvalues[2], 2.0, 1e-12);
  EXPECT_NEAR(e.eigenvalues[3], 0.5, 1e-12);
  EXPECT_NEAR(e.eigenvalues[5], -1.0, 1e-12);
}

TEST(SymEigen, LogdetAgreesWithCholesky) {
  for (int t = 0; t < 100; ++t) {
    Rng r(1000 + t);
    const auto c = sample_correlation_wishart(t % 2 == 0 ? 5 : 12, r);
    double s = 0.0;
    for (double l : sym_eigen(c.sym()).eigenvalues) s += std::log(l);
    EXPECT_NEAR(cholesky_logdet(c.sym()), s, 1e-8);
  }
}

TEST(ProjectToCone, FixesMembers) {
  const SymMatrix a{{2.0, 0.3}, {0.3, 1.0}};
  const SymMatrix p = project_to_cone(a, 0.1);
  EXPECT_LE(frobenius_distance(a.matrix(), p.matrix()), 1e-10);
}

TEST(ProjectToCone, ClampsDiagonal) {
  const auto p = project_to_cone_detailed(SymMatrix{{2.0, 0.0}, {0.0, -1.0}}, 0.1);
  EXPECT_NEAR(p.matrix(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(p.matrix(1, 1), 0.1, 1e-12);
  EXPECT_NEAR(p.matrix(0, 1), 0.0, 1e-12);
  EXPECT_EQ(p.clamped, 1u);
  EXPECT_EQ(p.min_eigenvalue_before, -1.0);
}

TEST(ProjectToCone, RejectsNonPositiveFloor) {
  EXPECT_THROW(project_to_cone(SymMatrix::identity(2), 0.0), Error);
}

TEST(ProjectToCone, RandomizedOptimality) {
  // The projection must be at least as close to A as any sampled cone member.
  std::mt19937_64 rng(17);
  const double z = 0.05;
  for (int t = 0; t < 20; ++t) {
    const SymMatrix a(oracle::random_symmetric(3, rng));
    const SymMatrix p = project_to_cone(a, z);
    const double best = frobenius_distance(a.matrix(), p.matrix());
    for (int s = 0; s < 1000; ++s) {
      const Matrix b = oracle::random_cone_member(3, z, rng);
      ASSERT_LE(best, frobenius_distance(a.matrix(), b) + 1e-12);
    }
  }
}

TEST(ProjectToCone, PropertiesOnRandomMatrices) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 2 + t % 7;
    const double z = 1e-3 * (1 + t % 5);
    const SymMatrix a(oracle::random_symmetric(d, rng));
    const SymMatrix p = project_to_cone(a, z);
    EXPECT_GE(sym_eigen(p).min_eigenvalue(), z - 1e-10);
    const SymMatrix pp = project_to_cone(p, z);
    EXPECT_LE(frobenius_distance(p.matrix(), pp.matrix()), 1e-10 * d);
    const auto eig = sym_eigen(a);
    if (eig.min_eigenvalue() > 0.0) {
      EXPECT_GE(cholesky_logdet(p), cholesky_logdet(a) - 1e-12);
    }
  }
}

TEST(BandableBounds, ClosedForms) {
  const auto b = bandable_eigen_bounds(0.2, 10);
  EXPECT_DOUBLE_EQ(b.lower, 0.5);
  EXPECT_DOUBLE_EQ(b.upper, 1.5);
  const auto tiny = bandable_eigen_bounds(1e-12, 3);
  EXPECT_NEAR(tiny.lower, 1.0, 1e-11);
  EXPECT_NEAR(tiny.upper, 1.0, 1e-11);
  EXPECT_NEAR(bandable_eigen_bounds(1.0 / 3.0, 4).lower, 0.0, 1e-15);
  EXPECT_LT(bandable_eigen_bounds(0.4, 4).lower, 0.0);
  EXPECT_THROW(bandable_eigen_bounds(0.0, 3), Error);
  EXPECT_THROW(bandable_eigen_bounds(1.0, 3), Error);
}

TEST(IsBandable, Examples) {
  EXPECT_TRUE(is_bandable(CorrelationMatrix(SymMatrix::identity(5)), 0.3));
  const double c = 0.4;
  Matrix m = Matrix::identity(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) m(i, j) = std::pow(c, std::abs(static_cast<double>(i) - static_cast<double>(j)));
  EXPECT_TRUE(is_bandable(CorrelationMatrix(SymMatrix(m)), c));
  m(0, 2) = m(2, 0) = c * c + 0.1;
  EXPECT_FALSE(is_bandable(CorrelationMatrix(SymMatrix(m)), c));
}

TEST(BandableBounds, GershgorinContainsSpectrum) {
  for (double c : {0.05, 0.15, 0.25, 0.3}) {
    const auto b = bandable_eigen_bounds(c, 1);
    for (std::size_t d : {2u, 7u, 30u}) {
      for (int t = 0; t < 20; ++t) {
        Rng rng(derive_seed(99, t, d));
        const auto a = sample_bandable(d, c, rng, t % 2 == 0);
        ASSERT_TRUE(is_bandable(a, c));
        const auto eig = sym_eigen(a.sym());
        EXPECT_GE(eig.min_eigenvalue(), b.lower - 1e-9);
        EXPECT_LE(eig.eigenvalues.front(), b.upper + 1e-9);
      }
    }
  }
}
