#include "dsekit/matstat.hpp"

#include <cmath>

namespace dsekit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

std::uint64_t RngStream::next_u64() { return engine_(); }

RngStream RngStream::substream(std::uint64_t key) const {
  return RngStream(mix64(seed_ ^ mix64(key)));
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) {
      throw NotPositiveDefinite("cholesky: pivot <= 0 at index " +
                                std::to_string(j));
    }
    lower(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double dot = lower.row(i).head(j).dot(lower.row(j).head(j));
      lower(i, j) = (m(i, j) - dot) / lower(j, j);
    }
  }
  return lower;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd psd_floor(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.eigenvalues().minCoeff() >= floor) {
    return m;
  }
  Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd repaired =
      eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return symmetrize(repaired);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  try {
    return cholesky(m);
  } catch (const NotPositiveDefinite&) {
    // Semidefinite or slightly indefinite input: clip and take the
    // eigenvalue square root. Any L with L*L^T = m works downstream.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
    Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd root =
        eig.eigenvectors() * clipped.cwiseSqrt().asDiagonal();
    if (!root.allFinite()) {
      throw NotPositiveDefinite("psd_sqrt: repair failed (non-finite input)");
    }
    return root;
  }
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  return eig.eigenvalues().minCoeff();
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, RngStream& rng) {
  const Eigen::MatrixXd root = psd_sqrt(cov);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = rng.normal();
  }
  return mean + root * z;
}

}  // namespace dsekit
