#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsekit/config.hpp"
#include "dsekit/enkf.hpp"
#include "dsekit/scenario.hpp"
#include "dsekit/ukf.hpp"

namespace dsekit {

enum class FilterKind { ukf, enkf };
std::string to_string(FilterKind kind);

/// Everything one `compare` run needs: scenario, both filter configs,
/// trial count, prior construction, MSE warmup window.
struct ExperimentConfig {
  ScenarioConfig scenario = ScenarioConfig::load_step_default();
  UkfConfig ukf = UkfConfig::generator_defaults();
  EnkfConfig enkf = EnkfConfig::generator_defaults();
  int trials = 11;
  Eigen::Vector4d prior_mean_offset{0.1, 0.001, 0.05, 0.05};
  Eigen::Matrix4d prior_cov =
      Eigen::Vector4d(1e-2, 1e-4, 1e-2, 1e-2).asDiagonal();
  double warmup = 1.0;  // s of estimates excluded from the MSE
  std::uint64_t seed = 42;
  int threads = 0;  // trial worker pool width; 0 = hardware concurrency

  void validate() const;
};

/// Builds an ExperimentConfig from a flat key=value config; unknown
/// keys are rejected with their line number.
ExperimentConfig experiment_from_config(const ConfigMap& cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Prior belief: equilibrium of the scenario's initial inputs shifted
/// by the configured per-state offsets.
BeliefState default_prior(const ExperimentConfig& cfg);

/// One filter pass over a record stream.
struct FilterRunResult {
  std::vector<BeliefState> beliefs;  // posterior per record
  std::vector<double> step_seconds;  // predict+update wall time per record
  double min_cov_eigenvalue;         // over all posterior covariances
  bool covariances_symmetric;        // exact (bitwise) symmetry held
};

/// Runs one filter over the stream: per record, predict over one PMU
/// interval using the record's terminal voltage (zero-order hold), then
/// update with its P/Q pair. The first record, at the prior's own
/// timestamp, is update-only. `rng` drives the EnKF and is unused for
/// the UKF.
FilterRunResult run_filter(const std::vector<PmuRecord>& records,
                           FilterKind kind, const ExperimentConfig& cfg,
                           const BeliefState& prior, RngStream rng);

/// Per-state mean of (estimate mean - truth)^2 over ticks with
/// t >= warmup. Throws LengthMismatch on misaligned series.
Eigen::Vector4d mse(const std::vector<BeliefState>& estimates,
                    const TruthTrajectory& truth, double warmup);

/// Aggregated comparison outcome: per-filter per-state MSE medians
/// across trials plus per-step wall-clock statistics.
struct MseReport {
  Eigen::Vector4d ukf_mse;
  Eigen::Vector4d enkf_mse;
  double ukf_mean_ms = 0.0;
  double ukf_p95_ms = 0.0;
  double enkf_mean_ms = 0.0;
  double enkf_p95_ms = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  double min_cov_eigenvalue = 0.0;
  bool covariances_symmetric = true;
};

/// Full experiment: truth once, then per trial a fresh seed-derived
/// corruption and both filters on the identical stream (enforced by
/// checksum). Trials run in a worker pool; the report is independent
/// of the pool width.
MseReport run_experiment(const ExperimentConfig& cfg);

/// Writes mse.csv (filter,state,mse,trials,seed) and timing.csv
/// (filter,mean_ms,p95_ms) into an existing directory.
void emit_report(const MseReport& report, const std::filesystem::path& dir);

/// Labelled estimate series for plotting.
struct NamedEstimates {
  std::string label;
  std::vector<BeliefState> beliefs;
};

/// Per state: one SVG overlaying truth and each estimate series, and
/// one SVG of per-tick squared error per series on a log scale.
void emit_plots(const TruthTrajectory& truth,
                const std::vector<NamedEstimates>& estimates,
                const std::filesystem::path& dir);

}  // namespace dsekit
