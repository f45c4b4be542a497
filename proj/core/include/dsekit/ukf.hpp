#pragma once

#include <Eigen/Dense>
#include <functional>

#include "dsekit/genmodel.hpp"
#include "dsekit/matstat.hpp"

namespace dsekit {

/// Gaussian belief over a state vector.
struct BeliefState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetric PSD after every repair
};

/// State transition / measurement maps used by the sample-based filters.
using TransitionFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MeasurementFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Scaled unscented-transform parameters plus the filter's assumed
/// process / measurement covariances.
struct UkfConfig {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 0.0;
  Eigen::MatrixXd process_cov;  // Q, n x n
  Eigen::MatrixXd meas_cov;     // R, m x m

  /// Checks alpha in (0,1] and n + lambda > 0 for state dimension n.
  void validate(int state_dim) const;

  /// Defaults for the 4-state generator, 2-channel power measurement.
  static UkfConfig generator_defaults();
};

/// The 2n+1 sigma points of a belief with their mean/cov weights.
struct SigmaSet {
  Eigen::MatrixXd points;        // n x (2n+1), column 0 is the mean
  Eigen::VectorXd mean_weights;  // sums to 1
  Eigen::VectorXd cov_weights;
};

/// Scaled symmetric sigma set: column 0 at the mean, columns i at
/// mean +/- sqrt((n+lambda) cov) columns.
SigmaSet sigma_points(const BeliefState& b, double alpha, double beta,
                      double kappa);

/// Propagates each sigma point through `f`, rebuilds mean/cov from the
/// weighted statistics, adds Q, repairs.
BeliefState ukf_predict(const BeliefState& b, const TransitionFn& f,
                        const UkfConfig& c);

/// Measurement update: sigma points mapped through `h`, gain from the
/// cross/innovation covariances, covariance repaired afterwards.
/// Throws SingularInnovation if Pyy + R is not positive definite.
BeliefState ukf_update(const BeliefState& b, const Eigen::VectorXd& y,
                       const MeasurementFn& h, const UkfConfig& c);

/// Generator-model bindings: predict over dt via RK4 with held inputs,
/// update with a P/Q measurement.
BeliefState ukf_predict(const BeliefState& b, const GenInput& u,
                        const GeneratorParams& p, const UkfConfig& c,
                        double dt, int substeps);
BeliefState ukf_update(const BeliefState& b, const Measurement& y,
                       const GenInput& u, const GeneratorParams& p,
                       const UkfConfig& c);

}  // namespace dsekit
