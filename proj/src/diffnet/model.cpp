#include "gw/diffnet/model.hpp"

namespace gw::diffnet {

Model::Model(int in_dim, int num_classes, const ModelOptions& opts, std::uint64_t seed)
    : opts_(opts) {
  if (!(opts.tau > 0.0)) {
    throw Error("model: temperature must be > 0");
  }
  Rng rng(seed);
  gcn_ = GcnStack(in_dim, num_classes, opts.gcn, rng);
  if (opts.learn_edges) {
    edge_ = EdgeModel(in_dim, opts.edge, rng);
  }
}

Vector Model::edge_logits(const Matrix& x, const cand::CandidateSet& cands) const {
  if (!opts_.learn_edges) {
    return Vector::Zero(cands.size());
  }
  return edge_.logits(x, cands);
}

const Matrix& Model::forward(const Matrix& x, const cand::CandidateSet& cands,
                             const ForwardSpec& spec) {
  x_ = &x;
  cands_ = &cands;
  up_dlogits_.reset();
  AdjacencyMode mode = spec.mode;
  if (!opts_.learn_edges) {
    mode = AdjacencyMode::kConstant;
  }
  switch (mode) {
  case AdjacencyMode::kConstant:
    adj_ = constant_adjacency(cands.size());
    break;
  case AdjacencyMode::kThreshold:
    adj_ = threshold_adjacency(edge_.logits(x, cands));
    break;
  case AdjacencyMode::kSample:
    adj_ = gumbel_sigmoid(edge_.logits(x, cands), opts_.tau, spec.seed, opts_.hard);
    break;
  case AdjacencyMode::kFixedNoise:
    if (spec.noise == nullptr) {
      throw Error("model: fixed-noise forward without noise");
    }
    adj_ = relax(edge_.logits(x, cands), *spec.noise, opts_.tau, opts_.hard);
    break;
  }
  has_forward_ = true;
  return gcn_.forward(x, cands, adj_.value, spec.dropout_rng);
}

LossBreakdown Model::loss(std::span<const int> labels, std::span<const std::uint8_t> train_mask,
                          const Objective& objective) {
  if (!has_forward_) {
    throw Error("model: loss requested before forward");
  }
  if (objective.lambda < 0.0) {
    throw Error("model: regularizer weight must be >= 0");
  }
  const Matrix& logits = gcn_.logits();
  CrossEntropy ce = cross_entropy(logits, labels, train_mask);
  LossBreakdown out;
  out.ce = ce.loss;
  Matrix dlogits = std::move(ce.dlogits);
  up_dz_ = Vector::Zero(adj_.size());

  if (objective.reg != Regularizer::kNone && objective.lambda > 0.0) {
    const cand::CandidateSet& cands = *cands_;
    const Vector& z = adj_.value;
    RegResult r;
    SoftLabels soft;
    const bool needs_labels = objective.reg != Regularizer::kDegree;
    if (needs_labels) {
      soft = soft_labels(logits, labels, train_mask);
    }
    switch (objective.reg) {
    case Regularizer::kDegree:
      r = degree_reg(cands, z, objective.d_star, objective.delta);
      break;
    case Regularizer::kLabel:
      r = label_consistency_reg(cands, z, soft.probs);
      break;
    case Regularizer::kNcon:
      r = neighborhood_consistency_reg(cands, z, soft.probs);
      break;
    case Regularizer::kInter:
      r = interclass_reg(cands, z, soft.probs, soft.assigned, objective.margin);
      break;
    case Regularizer::kNone:
      break;
    }
    out.reg = r.loss;
    up_dz_ = objective.lambda * r.dz;
    if (needs_labels) {
      dlogits += objective.lambda * soft_labels_backward(soft, r.dprobs);
    }
  }
  out.total = out.ce + objective.lambda * out.reg;
  up_dlogits_ = std::move(dlogits);
  return out;
}

void Model::backward() {
  if (!has_forward_ || !up_dlogits_) {
    throw Error("model: backward called before forward and loss");
  }
  backward(*up_dlogits_, up_dz_);
}

void Model::backward(const Matrix& dlogits, const Vector& dz) {
  if (!has_forward_) {
    throw Error("model: backward called before forward");
  }
  Vector dvalue = dz.size() ? dz : Vector::Zero(adj_.size());
  gcn_.backward(dlogits, dvalue);
  if (opts_.learn_edges && !adj_.constant) {
    edge_.backward(*x_, *cands_, sampler_backward(adj_, dvalue));
  }
}

void Model::zero_grad() {
  for (Param* p : params()) {
    p->zero_grad();
  }
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out = gcn_.params();
  if (opts_.learn_edges) {
    for (Param* p : edge_.params()) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<const Param*> Model::params() const {
  std::vector<const Param*> out = gcn_.params();
  if (opts_.learn_edges) {
    for (const Param* p : edge_.params()) {
      out.push_back(p);
    }
  }
  return out;
}

} // namespace gw::diffnet
