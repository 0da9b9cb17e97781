#include "gw/diffnet/sampler.hpp"

namespace gw::diffnet {

double gumbel(Rng& rng) {
  const double u = std::uniform_real_distribution<double>(kGumbelEps, 1.0 - kGumbelEps)(rng);
  return -std::log(-std::log(u));
}

SampledAdjacency relax(const Vector& theta, const Vector& noise, double tau, bool hard) {
  if (!(tau > 0.0)) {
    throw Error("gumbel_sigmoid: temperature must be > 0");
  }
  if (noise.size() != theta.size()) {
    throw Error("gumbel_sigmoid: noise length does not match logits");
  }
  SampledAdjacency adj;
  adj.theta = theta;
  adj.noise = noise;
  adj.tau = tau;
  adj.hard = hard;
  adj.soft.resize(theta.size());
  for (Eigen::Index e = 0; e < theta.size(); ++e) {
    adj.soft(e) = sigmoid((theta(e) + noise(e)) / tau);
  }
  if (hard) {
    adj.value = (adj.soft.array() > 0.5).cast<double>();
  } else {
    adj.value = adj.soft;
  }
  return adj;
}

SampledAdjacency gumbel_sigmoid(const Vector& theta, double tau, std::uint64_t seed, bool hard) {
  if (!(tau > 0.0)) {
    throw Error("gumbel_sigmoid: temperature must be > 0");
  }
  Rng rng(seed);
  Vector noise(theta.size());
  for (Eigen::Index e = 0; e < theta.size(); ++e) {
    const double g1 = gumbel(rng);
    const double g2 = gumbel(rng);
    noise(e) = g1 - g2;
  }
  return relax(theta, noise, tau, hard);
}

SampledAdjacency threshold_adjacency(const Vector& theta) {
  SampledAdjacency adj;
  adj.theta = theta;
  adj.noise = Vector::Zero(theta.size());
  adj.soft = theta.unaryExpr([](double t) { return sigmoid(t); });
  adj.value = (theta.array() > 0.0).cast<double>();
  adj.hard = true;
  adj.constant = true;
  return adj;
}

SampledAdjacency constant_adjacency(Eigen::Index size, double weight) {
  SampledAdjacency adj;
  adj.theta = Vector::Zero(size);
  adj.noise = Vector::Zero(size);
  adj.soft = Vector::Constant(size, weight);
  adj.value = adj.soft;
  adj.constant = true;
  return adj;
}

Vector sampler_backward(const SampledAdjacency& adj, const Vector& dvalue) {
  if (adj.constant) {
    return Vector::Zero(adj.size());
  }
  return dvalue.cwiseProduct(adj.soft.cwiseProduct((1.0 - adj.soft.array()).matrix())) / adj.tau;
}

} // namespace gw::diffnet
