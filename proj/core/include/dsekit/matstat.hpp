#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "dsekit/errors.hpp"

namespace dsekit {

/// Seeded random stream with value semantics. Identical seeds give
/// identical draw sequences; substream() derives an independent stream
/// from a key without disturbing this one, so per-member / per-trial
/// work can be farmed out and still replay exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  double normal();                 // N(0, 1)
  double uniform();                // [0, 1)
  std::uint64_t next_u64();

  /// Independent stream keyed off this stream's seed. Pure: does not
  /// advance this stream.
  RngStream substream(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 mix step; used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Lower-triangular L with L*L^T = m. Throws NotPositiveDefinite if a
/// pivot is <= 0.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& m);

/// (m + m^T) / 2. Output is bitwise symmetric and the map is idempotent.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

/// Clips eigenvalues of a symmetric matrix from below at `floor`.
/// Already-compliant input is returned unchanged (bitwise).
Eigen::MatrixXd psd_floor(const Eigen::MatrixXd& m, double floor);

/// Square root factor L with L*L^T = m for PSD m: Cholesky when m is
/// positive definite, eigenvalue-clipped square root after psd_floor
/// repair otherwise. Throws NotPositiveDefinite only if repair fails
/// (non-finite input).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Draw from N(mean, cov), cov PSD. Degenerate directions collapse to
/// the mean (cov = 0 returns exactly mean).
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, RngStream& rng);

}  // namespace dsekit
