#pragma once

#include <Eigen/Dense>

#include "dsekit/genmodel.hpp"
#include "dsekit/matstat.hpp"
#include "dsekit/ukf.hpp"  // BeliefState, TransitionFn, MeasurementFn

namespace dsekit {

/// Stochastic (perturbed-observation) ensemble filter configuration.
struct EnkfConfig {
  int ensemble_size = 100;
  Eigen::MatrixXd process_cov;  // Q, n x n
  Eigen::MatrixXd meas_cov;     // R, m x m
  double inflation = 1.0;       // multiplicative anomaly inflation, >= 1

  void validate() const;
  static EnkfConfig generator_defaults();
};

/// Monte-Carlo sample of the state posterior. The stream is the single
/// source of randomness for the whole filter run; per-member substreams
/// are derived from it each step so serial and parallel member loops
/// produce identical results.
struct Ensemble {
  Eigen::MatrixXd members;  // n x N, one column per member
  RngStream rng;

  int size() const { return static_cast<int>(members.cols()); }
};

/// N members drawn from the prior belief.
Ensemble enkf_init(const BeliefState& prior, const EnkfConfig& c,
                   RngStream rng);

/// Forecast: advance each member through `f`, add an independent
/// N(0, Q) draw, then inflate anomalies about the ensemble mean.
void enkf_predict(Ensemble& e, const TransitionFn& f, const EnkfConfig& c);

/// Perturbed-observation analysis: each member assimilates y + eps_i,
/// eps_i ~ N(0, R), with the gain built from ensemble anomalies
/// (1/(N-1) normalization). Throws SingularInnovation if Pyy + R is
/// not positive definite.
void enkf_update(Ensemble& e, const Eigen::VectorXd& y,
                 const MeasurementFn& h, const EnkfConfig& c);

/// Ensemble mean and unbiased sample covariance.
BeliefState ensemble_stats(const Ensemble& e);

/// Generator-model bindings.
void enkf_predict(Ensemble& e, const GenInput& u, const GeneratorParams& p,
                  const EnkfConfig& c, double dt, int substeps);
void enkf_update(Ensemble& e, const Measurement& y, const GenInput& u,
                 const GeneratorParams& p, const EnkfConfig& c);

}  // namespace dsekit
