#include "dsekit/matstat.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dsekit;

namespace {

Eigen::MatrixXd random_matrix(int n, RngStream& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

}  // namespace

TEST(Cholesky, IdentityIsItsOwnFactor) {
  const Eigen::MatrixXd eye = Eigen::Matrix4d::Identity();
  EXPECT_TRUE(cholesky(eye).isApprox(eye, 0.0));
}

TEST(Cholesky, DiagonalSquareRoots) {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 0.0, 0.0, 9.0;
  Eigen::MatrixXd expected(2, 2);
  expected << 2.0, 0.0, 0.0, 3.0;
  EXPECT_TRUE(cholesky(m).isApprox(expected, 0.0));
}

TEST(Cholesky, ReconstructsRandomSpd) {
  RngStream rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd b = random_matrix(4, rng);
    const Eigen::MatrixXd a = b * b.transpose() +
                              1e-6 * Eigen::Matrix4d::Identity();
    const Eigen::MatrixXd lower = cholesky(a);
    const double err = (lower * lower.transpose() - a).norm() / a.norm();
    EXPECT_LE(err, 1e-12);
  }
}

TEST(Cholesky, ThrowsOnIndefinite) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  EXPECT_THROW(cholesky(m), NotPositiveDefinite);
}

TEST(Symmetrize, AveragesOffDiagonal) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 2.0, 0.0, 0.0;
  Eigen::MatrixXd expected(2, 2);
  expected << 0.0, 1.0, 1.0, 0.0;
  EXPECT_TRUE(symmetrize(m).isApprox(expected, 0.0));
}

TEST(Symmetrize, BitwiseIdempotent) {
  RngStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd m = random_matrix(4, rng);
    const Eigen::MatrixXd once = symmetrize(m);
    const Eigen::MatrixXd twice = symmetrize(once);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        EXPECT_EQ(once(i, j), twice(i, j));
        EXPECT_EQ(once(i, j), once(j, i));
      }
    }
  }
}

TEST(PsdFloor, PsdInputUnchanged) {
  RngStream rng(31);
  const Eigen::MatrixXd b = random_matrix(4, rng);
  const Eigen::MatrixXd a = b * b.transpose();
  EXPECT_TRUE(psd_floor(a, 0.0).isApprox(a, 1e-12));
}

TEST(PsdFloor, ClipsTinyNegativeEigenvalue) {
  Eigen::MatrixXd m = Eigen::Matrix2d::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = -1e-15;
  const Eigen::MatrixXd repaired = psd_floor(m, 0.0);
  EXPECT_GE(min_eigenvalue(repaired), -1e-12 * repaired.trace());
  EXPECT_NEAR(repaired(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(repaired(1, 1), 0.0, 1e-12);
}

TEST(PsdFloor, RandomSymmetricRespectsFloor) {
  RngStream rng(57);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd m = symmetrize(random_matrix(4, rng));
    for (double floor : {0.0, 0.1, 1.0}) {
      const Eigen::MatrixXd repaired = psd_floor(m, floor);
      EXPECT_GE(min_eigenvalue(repaired),
                floor - 1e-12 * std::abs(repaired.trace()) - 1e-14);
      EXPECT_TRUE(repaired.isApprox(repaired.transpose(), 1e-14));
    }
  }
}

TEST(SampleMvn, ZeroCovReturnsExactMean) {
  RngStream rng(1);
  Eigen::VectorXd mean(3);
  mean << 1.0, -2.0, 0.5;
  const Eigen::VectorXd draw =
      sample_mvn(mean, Eigen::Matrix3d::Zero(), rng);
  EXPECT_TRUE(draw.isApprox(mean, 0.0));
}

TEST(SampleMvn, SampleCovarianceMatchesTarget) {
  RngStream rng(12345);
  Eigen::VectorXd mean = Eigen::Vector2d::Zero();
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.0, 0.0, 4.0;

  const int n = 1000000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d outer = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d draw = sample_mvn(mean, cov, rng);
    sum += draw;
    outer += draw * draw.transpose();
  }
  const Eigen::Vector2d m = sum / n;
  const Eigen::Matrix2d sample_cov = outer / n - m * m.transpose();
  EXPECT_NEAR(sample_cov(0, 0), 1.0, 0.02);
  EXPECT_NEAR(sample_cov(1, 1), 4.0, 0.08);
  EXPECT_NEAR(sample_cov(0, 1), 0.0, 0.02);
}

TEST(SampleMvn, FixedSeedReproduces) {
  Eigen::VectorXd mean = Eigen::Vector4d::Zero();
  const Eigen::MatrixXd cov = Eigen::Matrix4d::Identity();
  RngStream a(99), b(99);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd da = sample_mvn(mean, cov, a);
    const Eigen::VectorXd db = sample_mvn(mean, cov, b);
    EXPECT_TRUE(da.isApprox(db, 0.0));
  }
}

TEST(RngStream, SubstreamIgnoresPosition) {
  RngStream a(77), b(77);
  (void)b.normal();
  (void)b.normal();
  RngStream sub_a = a.substream(3);
  RngStream sub_b = b.substream(3);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(sub_a.next_u64(), sub_b.next_u64());
  }
}

TEST(RngStream, DistinctKeysDecorrelate) {
  RngStream base(42);
  EXPECT_NE(base.substream(0).next_u64(), base.substream(1).next_u64());
}
