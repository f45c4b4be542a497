#include "dsekit/ukf.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dsekit/genmodel.hpp"
#include "testutil.hpp"

using namespace dsekit;
using dsekit::testutil::default_linear_2state;
using dsekit::testutil::KalmanBelief;
using dsekit::testutil::kalman_predict;
using dsekit::testutil::kalman_update;
using dsekit::testutil::LinearSystem;
using dsekit::testutil::simulate_linear;

namespace {

UkfConfig linear_config(const LinearSystem& sys, double alpha, double beta,
                        double kappa) {
  UkfConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.kappa = kappa;
  c.process_cov = sys.Q;
  c.meas_cov = sys.R;
  return c;
}

TransitionFn linear_f(const LinearSystem& sys) {
  return [&sys](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return sys.A * x;
  };
}

MeasurementFn linear_h(const LinearSystem& sys) {
  return [&sys](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return sys.H * x;
  };
}

Eigen::VectorXd mean_of(const SigmaSet& set) {
  return set.points * set.mean_weights;
}

BeliefState random_belief(RngStream& rng) {
  BeliefState b;
  b.mean.resize(4);
  for (int i = 0; i < 4; ++i) {
    b.mean(i) = rng.normal();
  }
  Eigen::MatrixXd m(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m(i, j) = rng.normal();
    }
  }
  b.cov = m * m.transpose() + 1e-6 * Eigen::Matrix4d::Identity();
  return b;
}

}  // namespace

TEST(SigmaPoints, ZeroCovarianceCollapsesToMean) {
  BeliefState b{Eigen::Vector4d(0.5, -1.0, 2.0, 0.1),
                Eigen::Matrix4d::Zero()};
  const SigmaSet set = sigma_points(b, 1.0, 2.0, 0.0);
  ASSERT_EQ(set.points.cols(), 9);
  for (int i = 0; i < 9; ++i) {
    EXPECT_TRUE(set.points.col(i).isApprox(b.mean, 0.0));
  }
}

TEST(SigmaPoints, IdentityCovarianceAxisAligned) {
  BeliefState b{Eigen::Vector4d::Zero(), Eigen::Matrix4d::Identity()};
  // alpha=1, kappa=0 -> lambda=0, spread sqrt(n) = 2.
  const SigmaSet set = sigma_points(b, 1.0, 2.0, 0.0);
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d expected = Eigen::Vector4d::Zero();
    expected(i) = 2.0;
    EXPECT_TRUE(set.points.col(1 + i).isApprox(expected, 1e-14));
    EXPECT_TRUE(set.points.col(5 + i).isApprox(-expected, 1e-14));
  }
}

TEST(SigmaPoints, WeightedMeanReproducesSource) {
  RngStream rng(8);
  for (double alpha : {1.0, 0.5, 1e-3}) {
    for (double kappa : {0.0, -1.0, 3.0}) {
      for (int trial = 0; trial < 10; ++trial) {
        const BeliefState b = random_belief(rng);
        const SigmaSet set = sigma_points(b, alpha, 2.0, kappa);
        // Large cancelling weights at tiny alpha cost a few digits.
        const double weight_scale =
            set.mean_weights.cwiseAbs().maxCoeff();
        EXPECT_NEAR(set.mean_weights.sum(), 1.0,
                    1e-12 * std::max(1.0, weight_scale));
        const double tol = alpha >= 0.5 ? 1e-12 : 1e-9;
        EXPECT_LE((mean_of(set) - b.mean).lpNorm<Eigen::Infinity>(), tol);
      }
    }
  }
}

TEST(SigmaPoints, CovarianceReconstruction) {
  RngStream rng(9);
  for (double alpha : {1.0, 0.5}) {
    const BeliefState b = random_belief(rng);
    const SigmaSet set = sigma_points(b, alpha, 2.0, 0.0);
    Eigen::Matrix4d recon = Eigen::Matrix4d::Zero();
    for (int i = 0; i < set.points.cols(); ++i) {
      const Eigen::Vector4d d = set.points.col(i) - b.mean;
      recon += set.cov_weights(i) * d * d.transpose();
    }
    EXPECT_LE((recon - b.cov).norm(), 1e-10 * b.cov.norm());
  }
}

TEST(UkfLinear, PredictMatchesKalman) {
  const LinearSystem sys = default_linear_2state();
  const UkfConfig c = linear_config(sys, 1.0, 2.0, 0.0);
  BeliefState b{sys.x0, sys.P0};
  KalmanBelief kb{sys.x0, sys.P0};

  const BeliefState predicted = ukf_predict(b, linear_f(sys), c);
  const KalmanBelief expected = kalman_predict(kb, sys);

  EXPECT_LE((predicted.mean - expected.mean).norm(), 1e-12);
  EXPECT_LE((predicted.cov - expected.cov).norm(), 1e-12);
}

TEST(UkfLinear, UpdateMatchesKalman) {
  const LinearSystem sys = default_linear_2state();
  const UkfConfig c = linear_config(sys, 1.0, 2.0, 0.0);
  BeliefState b{sys.x0, sys.P0};
  KalmanBelief kb{sys.x0, sys.P0};
  Eigen::VectorXd y(1);
  y << 1.3;

  const BeliefState updated = ukf_update(b, y, linear_h(sys), c);
  const KalmanBelief expected = kalman_update(kb, y, sys);

  EXPECT_LE((updated.mean - expected.mean).norm(), 1e-12);
  EXPECT_LE((updated.cov - expected.cov).norm(), 1e-12);
}

TEST(UkfLinear, HundredStepEquivalenceAcrossTunings) {
  const LinearSystem sys = default_linear_2state();
  RngStream rng(314159);
  const auto run = simulate_linear(sys, 100, rng);

  const double tunings[][3] = {
      {1.0, 2.0, 0.0}, {0.5, 2.0, 1.0}, {0.9, 0.0, -1.0}, {1e-3, 2.0, 0.0}};
  for (const auto& t : tunings) {
    const UkfConfig c = linear_config(sys, t[0], t[1], t[2]);
    BeliefState b{sys.x0, sys.P0};
    KalmanBelief kb{sys.x0, sys.P0};
    for (int k = 0; k < 100; ++k) {
      b = ukf_predict(b, linear_f(sys), c);
      b = ukf_update(b, run.measurements[k], linear_h(sys), c);
      kb = kalman_predict(kb, sys);
      kb = kalman_update(kb, run.measurements[k], sys);
      ASSERT_LE((b.mean - kb.mean).lpNorm<Eigen::Infinity>(), 1e-8)
          << "alpha=" << t[0] << " step " << k;
      ASSERT_LE((b.cov - kb.cov).lpNorm<Eigen::Infinity>(), 1e-8)
          << "alpha=" << t[0] << " step " << k;
    }
  }
}

TEST(UkfPredict, IdentityDynamicsAddsProcessNoise) {
  RngStream rng(21);
  const BeliefState b = random_belief(rng);
  UkfConfig c;
  c.process_cov = 0.5 * Eigen::Matrix4d::Identity();
  c.meas_cov = Eigen::Matrix2d::Identity();
  const BeliefState out = ukf_predict(
      b, [](const Eigen::VectorXd& x) { return x; }, c);
  EXPECT_LE((out.mean - b.mean).norm(), 1e-12);
  EXPECT_LE((out.cov - (b.cov + c.process_cov)).norm(), 1e-10);
}

TEST(UkfPredict, EquilibriumZeroCovZeroQFixpoint) {
  const GeneratorParams p = GeneratorParams::demo_machine();
  const GenInput u{0.8, 2.4, 1.0};
  const GenState eq = find_equilibrium(u, p);

  UkfConfig c = UkfConfig::generator_defaults();
  c.process_cov = Eigen::Matrix4d::Zero();
  BeliefState b{eq.vec(), Eigen::Matrix4d::Zero()};
  const BeliefState out = ukf_predict(b, u, p, c, 1.0 / 60.0, 4);
  EXPECT_LE((out.mean - b.mean).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LE(out.cov.norm(), 1e-12);
}

TEST(UkfUpdate, HugeMeasurementNoiseIsUninformative) {
  const GeneratorParams p = GeneratorParams::demo_machine();
  const GenInput u{0.8, 2.4, 1.0};
  const GenState eq = find_equilibrium(u, p);

  UkfConfig c = UkfConfig::generator_defaults();
  c.meas_cov = 1e12 * Eigen::Matrix2d::Identity();
  BeliefState b{eq.vec(), 1e-2 * Eigen::Matrix4d::Identity()};
  const Measurement y{measure(eq, u, p).pt + 0.5,
                      measure(eq, u, p).qt - 0.5};
  const BeliefState out = ukf_update(b, y, u, p, c);
  EXPECT_LE((out.mean - b.mean).norm(), 1e-6 * b.mean.norm());
  EXPECT_LE((out.cov - b.cov).norm(), 1e-6 * b.cov.norm());
}

TEST(UkfUpdate, ZeroInnovationKeepsMean) {
  const LinearSystem sys = default_linear_2state();
  const UkfConfig c = linear_config(sys, 1.0, 2.0, 0.0);
  BeliefState b{sys.x0, sys.P0};
  const Eigen::VectorXd y = sys.H * b.mean;  // exactly the predicted output
  const BeliefState out = ukf_update(b, y, linear_h(sys), c);
  EXPECT_LE((out.mean - b.mean).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(UkfUpdate, PosteriorNeverExceedsPrior) {
  const GeneratorParams p = GeneratorParams::demo_machine();
  const GenInput u{0.8, 2.4, 1.0};
  const UkfConfig c = UkfConfig::generator_defaults();
  RngStream rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    BeliefState b = random_belief(rng);
    b.cov *= 1e-3;  // keep sigma points in a physical range
    b.mean = Eigen::Vector4d(0.3 + 0.4 * rng.uniform(), 0.001 * rng.normal(),
                             0.9 + 0.3 * rng.uniform(),
                             0.2 + 0.2 * rng.uniform());
    const Measurement y{rng.normal(), rng.normal()};
    const BeliefState out = ukf_update(b, y, u, p, c);
    EXPECT_GE(min_eigenvalue(b.cov - out.cov), -1e-10);
  }
}

TEST(UkfUpdate, DeterministicBitIdentical) {
  const GeneratorParams p = GeneratorParams::demo_machine();
  const GenInput u{0.8, 2.4, 1.0};
  const UkfConfig c = UkfConfig::generator_defaults();
  const GenState eq = find_equilibrium(u, p);
  BeliefState b{eq.vec() + Eigen::Vector4d(0.1, 0.001, 0.05, 0.05),
                1e-2 * Eigen::Matrix4d::Identity()};
  const Measurement y{0.82, 0.55};

  const BeliefState once = ukf_update(
      ukf_predict(b, u, p, c, 1.0 / 60.0, 4), y, u, p, c);
  const BeliefState twice = ukf_update(
      ukf_predict(b, u, p, c, 1.0 / 60.0, 4), y, u, p, c);
  EXPECT_TRUE(once.mean.isApprox(twice.mean, 0.0));
  EXPECT_TRUE(once.cov.isApprox(twice.cov, 0.0));
}

TEST(UkfUpdate, SingularInnovationThrows) {
  const LinearSystem sys = default_linear_2state();
  UkfConfig c = linear_config(sys, 1.0, 2.0, 0.0);
  c.meas_cov = Eigen::MatrixXd::Zero(1, 1);
  BeliefState b{sys.x0, Eigen::Matrix2d::Zero()};  // no spread, no R
  Eigen::VectorXd y(1);
  y << 1.0;
  EXPECT_THROW(ukf_update(b, y, linear_h(sys), c), SingularInnovation);
}

TEST(SigmaPoints, NonFiniteCovarianceAborts) {
  BeliefState b{Eigen::Vector4d::Zero(), Eigen::Matrix4d::Identity()};
  b.cov(2, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sigma_points(b, 1.0, 2.0, 0.0), NotPositiveDefinite);
}

TEST(UkfConfigTest, ValidatesSpreadParameters) {
  UkfConfig c = UkfConfig::generator_defaults();
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(4), std::invalid_argument);
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(4), std::invalid_argument);
  c.alpha = 0.5;
  c.kappa = -4.0;  // n + lambda <= 0
  EXPECT_THROW(c.validate(4), std::invalid_argument);
}
