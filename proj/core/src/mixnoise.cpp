#include "dsekit/mixnoise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dsekit {

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::invalid_argument("GaussianMixture: no components");
  }
  double total = 0.0;
  cumulative_.reserve(components_.size());
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !(c.variance > 0.0) || !std::isfinite(c.mean)) {
      throw std::invalid_argument(
          "GaussianMixture: weights and variances must be positive, means "
          "finite");
    }
    total += c.weight;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GaussianMixture: weights must sum to 1");
  }
  cumulative_.back() = 1.0;  // guard the last bin against roundoff
}

double GaussianMixture::sample(RngStream& rng) const {
  const double u = rng.uniform();
  std::size_t k = 0;
  while (k + 1 < cumulative_.size() && u >= cumulative_[k]) {
    ++k;
  }
  const auto& c = components_[k];
  return c.mean + std::sqrt(c.variance) * rng.normal();
}

double GaussianMixture::pdf(double x) const {
  double density = 0.0;
  for (const auto& c : components_) {
    const double z = x - c.mean;
    density += c.weight *
               std::exp(-0.5 * z * z / c.variance) /
               std::sqrt(2.0 * std::numbers::pi * c.variance);
  }
  return density;
}

GaussianMixture::Moments GaussianMixture::moments() const {
  double mean = 0.0;
  double second = 0.0;
  for (const auto& c : components_) {
    mean += c.weight * c.mean;
    second += c.weight * (c.variance + c.mean * c.mean);
  }
  return {mean, second - mean * mean};
}

GaussianMixture bimodal_default() {
  return GaussianMixture({{0.9, 0.0, 1e-4}, {0.1, 0.0, 1e-3}});
}

}  // namespace dsekit
