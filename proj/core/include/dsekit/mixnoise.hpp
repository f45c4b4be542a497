#pragma once

#include <vector>

#include "dsekit/matstat.hpp"

namespace dsekit {

/// One Gaussian component: weight in (0, 1], mean, variance > 0.
struct GaussianComponent {
  double weight;
  double mean;
  double variance;
};

/// Finite weighted sum of scalar Gaussian densities. Immutable after
/// construction; weights must sum to 1 within 1e-12.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  /// Draws a component index by weight, then a normal deviate from it.
  double sample(RngStream& rng) const;

  /// Mixture density at x.
  double pdf(double x) const;

  struct Moments {
    double mean;
    double variance;
  };
  /// Exact first two moments: mean = sum w*mu,
  /// variance = sum w*(sigma^2 + mu^2) - mean^2.
  Moments moments() const;

  const std::vector<GaussianComponent>& components() const {
    return components_;
  }

 private:
  std::vector<GaussianComponent> components_;
  std::vector<double> cumulative_;  // cumulative weights for sampling
};

/// The default bimodal measurement-noise mixture: zero means, variances
/// 1e-4 / 1e-3, weights 0.9 / 0.1.
GaussianMixture bimodal_default();

/// Per-channel noise model for the two power measurements, independent
/// across channels and time.
struct NoiseSpec {
  GaussianMixture pt;
  GaussianMixture qt;
};

}  // namespace dsekit
