#include "dsekit/ukf.hpp"

#include <cmath>
#include <stdexcept>

namespace dsekit {

void UkfConfig::validate(int state_dim) const {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("UkfConfig: alpha must be in (0, 1]");
  }
  const double lambda = alpha * alpha * (state_dim + kappa) - state_dim;
  if (!(state_dim + lambda > 0.0)) {
    throw std::invalid_argument("UkfConfig: n + lambda must be positive");
  }
}

UkfConfig UkfConfig::generator_defaults() {
  UkfConfig c;
  c.alpha = 1.0;
  c.beta = 2.0;
  c.kappa = 0.0;
  c.process_cov = 1e-8 * Eigen::Matrix4d::Identity();
  c.meas_cov = 1.9e-4 * Eigen::Matrix2d::Identity();
  return c;
}

SigmaSet sigma_points(const BeliefState& b, double alpha, double beta,
                      double kappa) {
  const Eigen::Index n = b.mean.size();
  const double lambda = alpha * alpha * (n + kappa) - n;
  const double scale = n + lambda;

  SigmaSet set;
  set.points.resize(n, 2 * n + 1);
  set.mean_weights.resize(2 * n + 1);
  set.cov_weights.resize(2 * n + 1);

  const Eigen::MatrixXd root = psd_sqrt(scale * b.cov);
  set.points.col(0) = b.mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    set.points.col(1 + i) = b.mean + root.col(i);
    set.points.col(1 + n + i) = b.mean - root.col(i);
  }

  set.mean_weights(0) = lambda / scale;
  set.cov_weights(0) = lambda / scale + (1.0 - alpha * alpha + beta);
  for (Eigen::Index i = 1; i < 2 * n + 1; ++i) {
    set.mean_weights(i) = 1.0 / (2.0 * scale);
    set.cov_weights(i) = 1.0 / (2.0 * scale);
  }
  return set;
}

namespace {

Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& pts,
                              const Eigen::VectorXd& w) {
  return pts * w;
}

Eigen::MatrixXd weighted_outer(const Eigen::MatrixXd& a_pts,
                               const Eigen::VectorXd& a_mean,
                               const Eigen::MatrixXd& b_pts,
                               const Eigen::VectorXd& b_mean,
                               const Eigen::VectorXd& w) {
  Eigen::MatrixXd acc =
      Eigen::MatrixXd::Zero(a_pts.rows(), b_pts.rows());
  for (Eigen::Index i = 0; i < a_pts.cols(); ++i) {
    acc.noalias() +=
        w(i) * (a_pts.col(i) - a_mean) * (b_pts.col(i) - b_mean).transpose();
  }
  return acc;
}

Eigen::MatrixXd repair(const Eigen::MatrixXd& cov) {
  return psd_floor(symmetrize(cov), 0.0);
}

}  // namespace

BeliefState ukf_predict(const BeliefState& b, const TransitionFn& f,
                        const UkfConfig& c) {
  c.validate(static_cast<int>(b.mean.size()));
  SigmaSet set = sigma_points(b, c.alpha, c.beta, c.kappa);

  Eigen::MatrixXd propagated(set.points.rows(), set.points.cols());
  for (Eigen::Index i = 0; i < set.points.cols(); ++i) {
    propagated.col(i) = f(set.points.col(i));
  }
  if (!propagated.allFinite()) {
    throw NonFiniteState("ukf_predict: propagated sigma point not finite");
  }

  BeliefState out;
  out.mean = weighted_mean(propagated, set.mean_weights);
  out.cov = weighted_outer(propagated, out.mean, propagated, out.mean,
                           set.cov_weights) +
            c.process_cov;
  out.cov = repair(out.cov);
  return out;
}

BeliefState ukf_update(const BeliefState& b, const Eigen::VectorXd& y,
                       const MeasurementFn& h, const UkfConfig& c) {
  c.validate(static_cast<int>(b.mean.size()));
  SigmaSet set = sigma_points(b, c.alpha, c.beta, c.kappa);

  Eigen::MatrixXd mapped(y.size(), set.points.cols());
  for (Eigen::Index i = 0; i < set.points.cols(); ++i) {
    mapped.col(i) = h(set.points.col(i));
  }

  const Eigen::VectorXd y_hat = weighted_mean(mapped, set.mean_weights);
  const Eigen::MatrixXd pyy =
      weighted_outer(mapped, y_hat, mapped, y_hat, set.cov_weights);
  const Eigen::MatrixXd pxy =
      weighted_outer(set.points, b.mean, mapped, y_hat, set.cov_weights);

  const Eigen::MatrixXd s = symmetrize(pyy + c.meas_cov);
  Eigen::MatrixXd s_chol;
  try {
    s_chol = cholesky(s);
  } catch (const NotPositiveDefinite&) {
    throw SingularInnovation("ukf_update: innovation covariance not PD");
  }
  // K = Pxy * S^-1 via the factor we already have.
  const Eigen::MatrixXd gain =
      s_chol.transpose()
          .triangularView<Eigen::Upper>()
          .solve(s_chol.triangularView<Eigen::Lower>().solve(pxy.transpose()))
          .transpose();

  BeliefState out;
  out.mean = b.mean + gain * (y - y_hat);
  out.cov = repair(b.cov - gain * s * gain.transpose());
  return out;
}

BeliefState ukf_predict(const BeliefState& b, const GenInput& u,
                        const GeneratorParams& p, const UkfConfig& c,
                        double dt, int substeps) {
  return ukf_predict(
      b,
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return step_rk4(GenState::from_vec(x), u, p, dt, substeps).vec();
      },
      c);
}

BeliefState ukf_update(const BeliefState& b, const Measurement& y,
                       const GenInput& u, const GeneratorParams& p,
                       const UkfConfig& c) {
  return ukf_update(
      b, y.vec(),
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return measure(GenState::from_vec(x), u, p).vec();
      },
      c);
}

}  // namespace dsekit
