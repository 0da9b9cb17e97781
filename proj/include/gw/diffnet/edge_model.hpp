#pragma once

#include "gw/candidates.hpp"
#include "gw/diffnet/param.hpp"

#include <vector>

namespace gw::diffnet {

struct EdgeModelOptions {
  int rank = 8;
  /// Std of the N(0, init_scale^2 / dim) entries of U and V.
  double init_scale = 0.1;
  double bias_init = 0.0;
  double prior_init = 2.0;
  bool learn_prior = true;
};

/// Low-rank bilinear edge scorer:
///   theta_ij = <U^T x_i, V^T x_j> + b + beta * existing_ij.
class EdgeModel {
public:
  EdgeModel() = default;
  EdgeModel(int dim, const EdgeModelOptions& opts, Rng& rng);

  /// Pre-sigmoid logits for every candidate pair.
  Vector logits(const Matrix& x, const cand::CandidateSet& cands) const;

  /// Accumulates parameter gradients for upstream dL/dtheta.
  void backward(const Matrix& x, const cand::CandidateSet& cands, const Vector& dtheta);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  Param& u() { return u_; }
  Param& v() { return v_; }
  Param& bias() { return b_; }
  Param& prior() { return beta_; }
  const Param& u() const { return u_; }
  const Param& v() const { return v_; }
  const Param& bias() const { return b_; }
  const Param& prior() const { return beta_; }
  int rank() const { return static_cast<int>(u_.value.cols()); }

private:
  void check(const Matrix& x, const cand::CandidateSet& cands) const;

  Param u_;
  Param v_;
  Param b_;
  Param beta_;
  bool learn_prior_ = true;
};

} // namespace gw::diffnet
