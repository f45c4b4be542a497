#include "dsekit/enkf.hpp"

#include <stdexcept>

namespace dsekit {

void EnkfConfig::validate() const {
  if (ensemble_size < 2) {
    throw std::invalid_argument("EnkfConfig: ensemble_size must be >= 2");
  }
  if (!(inflation >= 1.0)) {
    throw std::invalid_argument("EnkfConfig: inflation must be >= 1");
  }
}

EnkfConfig EnkfConfig::generator_defaults() {
  EnkfConfig c;
  c.ensemble_size = 100;
  c.process_cov = 1e-8 * Eigen::Matrix4d::Identity();
  c.meas_cov = 1.9e-4 * Eigen::Matrix2d::Identity();
  c.inflation = 1.0;
  return c;
}

Ensemble enkf_init(const BeliefState& prior, const EnkfConfig& c,
                   RngStream rng) {
  c.validate();
  Ensemble e{Eigen::MatrixXd(prior.mean.size(), c.ensemble_size),
             std::move(rng)};
  const Eigen::MatrixXd root = psd_sqrt(prior.cov);
  for (int i = 0; i < c.ensemble_size; ++i) {
    Eigen::VectorXd z(prior.mean.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      z(j) = e.rng.normal();
    }
    e.members.col(i) = prior.mean + root * z;
  }
  return e;
}

void enkf_predict(Ensemble& e, const TransitionFn& f, const EnkfConfig& c) {
  const int n_members = e.size();
  const Eigen::MatrixXd q_root = psd_sqrt(c.process_cov);
  const std::uint64_t step_key = e.rng.next_u64();

  for (int i = 0; i < n_members; ++i) {
    Eigen::VectorXd advanced = f(e.members.col(i));
    if (!advanced.allFinite()) {
      throw NonFiniteState("enkf_predict: member " + std::to_string(i) +
                           " diverged");
    }
    RngStream member_rng(mix64(step_key ^ mix64(i)));
    Eigen::VectorXd z(advanced.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      z(j) = member_rng.normal();
    }
    e.members.col(i) = advanced + q_root * z;
  }

  if (c.inflation > 1.0) {
    const Eigen::VectorXd mean = e.members.rowwise().mean();
    for (int i = 0; i < n_members; ++i) {
      e.members.col(i) = mean + c.inflation * (e.members.col(i) - mean);
    }
  }
}

void enkf_update(Ensemble& e, const Eigen::VectorXd& y,
                 const MeasurementFn& h, const EnkfConfig& c) {
  const int n_members = e.size();
  const Eigen::Index m = y.size();

  Eigen::MatrixXd mapped(m, n_members);
  for (int i = 0; i < n_members; ++i) {
    mapped.col(i) = h(e.members.col(i));
  }

  const Eigen::VectorXd x_mean = e.members.rowwise().mean();
  const Eigen::VectorXd y_mean = mapped.rowwise().mean();
  const Eigen::MatrixXd x_anom = e.members.colwise() - x_mean;
  const Eigen::MatrixXd y_anom = mapped.colwise() - y_mean;

  const double norm = 1.0 / (n_members - 1);
  const Eigen::MatrixXd pxy = norm * x_anom * y_anom.transpose();
  const Eigen::MatrixXd pyy = norm * y_anom * y_anom.transpose();

  const Eigen::MatrixXd s = symmetrize(pyy + c.meas_cov);
  Eigen::MatrixXd s_chol;
  try {
    s_chol = cholesky(s);
  } catch (const NotPositiveDefinite&) {
    throw SingularInnovation("enkf_update: innovation covariance not PD");
  }
  const Eigen::MatrixXd gain =
      s_chol.transpose()
          .triangularView<Eigen::Upper>()
          .solve(s_chol.triangularView<Eigen::Lower>().solve(pxy.transpose()))
          .transpose();

  const Eigen::MatrixXd r_root = psd_sqrt(c.meas_cov);
  const std::uint64_t step_key = e.rng.next_u64();
  for (int i = 0; i < n_members; ++i) {
    RngStream member_rng(mix64(step_key ^ mix64(i)));
    Eigen::VectorXd eps(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      eps(j) = member_rng.normal();
    }
    e.members.col(i) +=
        gain * (y + r_root * eps - mapped.col(i));
  }
}

BeliefState ensemble_stats(const Ensemble& e) {
  if (e.size() < 2) {
    throw std::invalid_argument("ensemble_stats: need at least 2 members");
  }
  BeliefState b;
  b.mean = e.members.rowwise().mean();
  const Eigen::MatrixXd anom = e.members.colwise() - b.mean;
  b.cov = symmetrize(anom * anom.transpose() / (e.size() - 1));
  return b;
}

void enkf_predict(Ensemble& e, const GenInput& u, const GeneratorParams& p,
                  const EnkfConfig& c, double dt, int substeps) {
  enkf_predict(
      e,
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return step_rk4(GenState::from_vec(x), u, p, dt, substeps).vec();
      },
      c);
}

void enkf_update(Ensemble& e, const Measurement& y, const GenInput& u,
                 const GeneratorParams& p, const EnkfConfig& c) {
  enkf_update(
      e, y.vec(),
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return measure(GenState::from_vec(x), u, p).vec();
      },
      c);
}

}  // namespace dsekit
