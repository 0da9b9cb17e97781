#pragma once

#include "gw/common.hpp"

#include <cstdint>

namespace gw::diffnet {

/// Smallest distance of the uniform draws from 0 and 1.
inline constexpr double kGumbelEps = 1e-12;

/// One relaxed Bernoulli draw per candidate pair.
struct SampledAdjacency {
  Vector theta;
  /// g1 - g2 per pair; zero for deterministic adjacencies.
  Vector noise;
  /// sigma((theta + noise) / tau).
  Vector soft;
  /// Weights used by the forward pass: round(soft) in hard mode, soft otherwise.
  Vector value;
  double tau = 1.0;
  bool hard = false;
  /// Set when value does not depend on theta (thresholded or constant weights).
  bool constant = false;

  Eigen::Index size() const { return value.size(); }
};

/// Standard Gumbel draw -log(-log u) with u uniform on (eps, 1 - eps).
double gumbel(Rng& rng);

/// Binary concrete sample z = sigma((theta + g1 - g2) / tau) with fresh noise.
SampledAdjacency gumbel_sigmoid(const Vector& theta, double tau, std::uint64_t seed, bool hard);

/// Same relaxation with caller-supplied noise g1 - g2.
SampledAdjacency relax(const Vector& theta, const Vector& noise, double tau, bool hard);

/// Hard weights [theta > 0], i.e. sigma(theta) > 1/2; no gradient path.
SampledAdjacency threshold_adjacency(const Vector& theta);

/// Every weight equal to `weight`; no gradient path.
SampledAdjacency constant_adjacency(Eigen::Index size, double weight = 1.0);

/// dL/dtheta from dL/dvalue; straight-through in hard mode.
Vector sampler_backward(const SampledAdjacency& adj, const Vector& dvalue);

} // namespace gw::diffnet
