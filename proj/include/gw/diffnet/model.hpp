#pragma once

#include "gw/diffnet/edge_model.hpp"
#include "gw/diffnet/gcn.hpp"
#include "gw/diffnet/losses.hpp"
#include "gw/diffnet/sampler.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gw::diffnet {

struct ModelOptions {
  GcnOptions gcn;
  EdgeModelOptions edge;
  /// false: a plain GCN over the candidate pairs with every weight fixed at 1.
  bool learn_edges = true;
  double tau = 0.1;
  bool hard = false;
};

struct Objective {
  Regularizer reg = Regularizer::kNone;
  double lambda = 0.0;
  double d_star = 0.0;
  double delta = 1.0;
  double margin = 1.0;
};

enum class AdjacencyMode {
  /// Fresh Gumbel noise drawn from `seed`.
  kSample,
  /// Caller-supplied noise (g1 - g2 per pair).
  kFixedNoise,
  /// Deterministic [sigma(theta) > 1/2].
  kThreshold,
  /// Weight 1 on every pair.
  kConstant,
};

struct ForwardSpec {
  AdjacencyMode mode = AdjacencyMode::kThreshold;
  std::uint64_t seed = 0;
  const Vector* noise = nullptr;
  /// Enables dropout when set.
  Rng* dropout_rng = nullptr;
};

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;
  double reg = 0.0;
};

/// Edge model, sampler and GCN classifier trained end to end.
class Model {
public:
  Model() = default;
  Model(int in_dim, int num_classes, const ModelOptions& opts, std::uint64_t seed);

  const Matrix& forward(const Matrix& x, const cand::CandidateSet& cands, const ForwardSpec& spec);

  /// CE on `train_mask` plus lambda times the active regularizer, evaluated on
  /// the last forward pass. Stores the upstream gradients used by backward().
  LossBreakdown loss(std::span<const int> labels, std::span<const std::uint8_t> train_mask,
                     const Objective& objective);

  /// Accumulates parameter gradients from the stored upstream gradients.
  void backward();
  /// Accumulates parameter gradients for explicit dL/dlogits and dL/dz.
  void backward(const Matrix& dlogits, const Vector& dz);

  void zero_grad();
  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  const SampledAdjacency& adjacency() const { return adj_; }
  const Matrix& logits() const { return gcn_.logits(); }
  const ModelOptions& options() const { return opts_; }
  EdgeModel& edge_model() { return edge_; }
  const EdgeModel& edge_model() const { return edge_; }
  GcnStack& gcn() { return gcn_; }

  /// Logits sigma^{-1} of the keep probabilities for `cands`; zero for plain GCNs.
  Vector edge_logits(const Matrix& x, const cand::CandidateSet& cands) const;

private:
  ModelOptions opts_;
  EdgeModel edge_;
  GcnStack gcn_;
  SampledAdjacency adj_;
  const Matrix* x_ = nullptr;
  const cand::CandidateSet* cands_ = nullptr;
  bool has_forward_ = false;
  std::optional<Matrix> up_dlogits_;
  Vector up_dz_;
};

} // namespace gw::diffnet
