#include "gw/diffnet/losses.hpp"

#include <algorithm>

namespace gw::diffnet {

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

CrossEntropy cross_entropy(const Matrix& logits, std::span<const int> labels,
                           std::span<const std::uint8_t> mask) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows() ||
      static_cast<Eigen::Index>(mask.size()) != logits.rows()) {
    throw Error("cross_entropy: labels or mask length does not match logits");
  }
  const auto count = std::count(mask.begin(), mask.end(), std::uint8_t{1});
  if (count == 0) {
    throw Error("cross_entropy: empty mask");
  }
  CrossEntropy ce;
  ce.dlogits = Matrix::Zero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(count);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) {
      continue;
    }
    const int y = labels[i];
    if (y < 0 || y >= logits.cols()) {
      throw Error("cross_entropy: masked node " + std::to_string(i) + " has no valid label");
    }
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - mx;
    const double lse = std::log(shifted.array().exp().sum());
    ce.loss += (lse - shifted(y)) * inv;
    ce.dlogits.row(i) = (shifted.array() - lse).exp().matrix() * inv;
    ce.dlogits(i, y) -= inv;
  }
  return ce;
}

SoftLabels soft_labels(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::uint8_t> train_mask) {
  const Eigen::Index n = logits.rows();
  SoftLabels s;
  s.probs = softmax_rows(logits);
  s.fixed.assign(n, 0);
  s.assigned.assign(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool train = i < static_cast<Eigen::Index>(train_mask.size()) && train_mask[i] &&
                       labels[i] >= 0;
    if (train) {
      s.probs.row(i).setZero();
      s.probs(i, labels[i]) = 1.0;
      s.fixed[i] = 1;
      s.assigned[i] = labels[i];
    } else {
      Eigen::Index arg = 0;
      s.probs.row(i).maxCoeff(&arg);
      s.assigned[i] = static_cast<int>(arg);
    }
  }
  return s;
}

Matrix soft_labels_backward(const SoftLabels& soft, const Matrix& dprobs) {
  Matrix dlogits = Matrix::Zero(dprobs.rows(), dprobs.cols());
  for (Eigen::Index i = 0; i < dprobs.rows(); ++i) {
    if (soft.fixed[i]) {
      continue;
    }
    const auto p = soft.probs.row(i);
    const double inner = p.dot(dprobs.row(i));
    dlogits.row(i) = p.cwiseProduct(dprobs.row(i)) - inner * p;
  }
  return dlogits;
}

std::string to_string(Regularizer r) {
  switch (r) {
  case Regularizer::kNone: return "none";
  case Regularizer::kDegree: return "deg";
  case Regularizer::kLabel: return "label";
  case Regularizer::kNcon: return "ncon";
  case Regularizer::kInter: return "inter";
  }
  throw Error("unknown regularizer");
}

Regularizer regularizer_from_string(const std::string& s) {
  for (Regularizer r : {Regularizer::kNone, Regularizer::kDegree, Regularizer::kLabel,
                        Regularizer::kNcon, Regularizer::kInter}) {
    if (to_string(r) == s) {
      return r;
    }
  }
  throw Error("unknown regularizer: " + s);
}

Vector soft_degrees(const cand::CandidateSet& cands, const Vector& z) {
  Vector d = Vector::Zero(cands.num_nodes);
  for (edge_t e = 0; e < cands.size(); ++e) {
    d(cands.src[e]) += z(e);
  }
  return d;
}

RegResult degree_reg(const cand::CandidateSet& cands, const Vector& z, double d_star,
                     double delta) {
  if (d_star < 0.0) {
    throw Error("degree_reg: target degree must be >= 0");
  }
  const Vector d = soft_degrees(cands, z);
  const double inv_n = cands.num_nodes ? 1.0 / cands.num_nodes : 0.0;
  RegResult r;
  r.dz = Vector::Zero(z.size());
  Vector slope(cands.num_nodes);
  for (node_t i = 0; i < cands.num_nodes; ++i) {
    const double gap = std::max(0.0, d_star - d(i) + delta);
    r.loss += gap * gap * inv_n;
    slope(i) = -2.0 * gap * inv_n;
  }
  for (edge_t e = 0; e < cands.size(); ++e) {
    r.dz(e) = slope(cands.src[e]);
  }
  return r;
}

RegResult label_consistency_reg(const cand::CandidateSet& cands, const Vector& z,
                                const Matrix& probs) {
  const double total = z.sum();
  if (total == 0.0) {
    throw Error("label_consistency_reg: soft edge count is zero");
  }
  RegResult r;
  r.dz.resize(z.size());
  r.dprobs = Matrix::Zero(probs.rows(), probs.cols());
  Vector mismatch(z.size());
  for (edge_t e = 0; e < cands.size(); ++e) {
    mismatch(e) = 1.0 - probs.row(cands.src[e]).dot(probs.row(cands.dst[e]));
    r.loss += z(e) * mismatch(e);
  }
  r.loss /= total;
  for (edge_t e = 0; e < cands.size(); ++e) {
    const node_t i = cands.src[e];
    const node_t j = cands.dst[e];
    r.dz(e) = (mismatch(e) - r.loss) / total;
    r.dprobs.row(i) -= (z(e) / total) * probs.row(j);
    r.dprobs.row(j) -= (z(e) / total) * probs.row(i);
  }
  return r;
}

RegResult neighborhood_consistency_reg(const cand::CandidateSet& cands, const Vector& z,
                                       const Matrix& probs) {
  RegResult r;
  r.dz = Vector::Zero(z.size());
  r.dprobs = Matrix::Zero(probs.rows(), probs.cols());
  const double total = z.sum();
  if (total == 0.0) {
    return r;
  }
  const node_t n = cands.num_nodes;
  Matrix agg = probs;
  Vector denom = Vector::Ones(n);
  for (edge_t e = 0; e < cands.size(); ++e) {
    agg.row(cands.src[e]) += z(e) * probs.row(cands.dst[e]);
    denom(cands.src[e]) += z(e);
  }
  for (node_t i = 0; i < n; ++i) {
    agg.row(i) /= denom(i);
  }
  Vector mismatch(z.size());
  for (edge_t e = 0; e < cands.size(); ++e) {
    mismatch(e) = 1.0 - agg.row(cands.src[e]).dot(agg.row(cands.dst[e]));
    r.loss += z(e) * mismatch(e);
  }
  r.loss /= total;

  Matrix dagg = Matrix::Zero(n, probs.cols());
  for (edge_t e = 0; e < cands.size(); ++e) {
    const node_t i = cands.src[e];
    const node_t j = cands.dst[e];
    r.dz(e) = (mismatch(e) - r.loss) / total;
    dagg.row(i) -= (z(e) / total) * agg.row(j);
    dagg.row(j) -= (z(e) / total) * agg.row(i);
  }
  // agg_i = num_i / denom_i with num_i = y_i + sum z y_j, denom_i = 1 + sum z.
  for (node_t i = 0; i < n; ++i) {
    r.dprobs.row(i) += dagg.row(i) / denom(i);
  }
  for (edge_t e = 0; e < cands.size(); ++e) {
    const node_t i = cands.src[e];
    const node_t j = cands.dst[e];
    r.dz(e) += dagg.row(i).dot(probs.row(j) - agg.row(i)) / denom(i);
    r.dprobs.row(j) += (z(e) / denom(i)) * dagg.row(i);
  }
  return r;
}

RegResult interclass_reg(const cand::CandidateSet& cands, const Vector& z, const Matrix& probs,
                         std::span<const int> assigned, double margin) {
  if (!(margin > 0.0)) {
    throw Error("interclass_reg: margin must be > 0");
  }
  const node_t n = cands.num_nodes;
  const int C = static_cast<int>(probs.cols());
  RegResult r;
  r.dz = Vector::Zero(z.size());
  r.dprobs = Matrix::Zero(probs.rows(), C);

  const Vector deg = soft_degrees(cands, z);
  Eigen::Index arg_max = 0;
  const double d_max = n ? deg.maxCoeff(&arg_max) : 0.0;
  const double log_c = C > 1 ? std::log(static_cast<double>(C)) : 0.0;

  Vector entropy = Vector::Zero(n);
  Vector weight = Vector::Zero(n);
  for (node_t v = 0; v < n; ++v) {
    double h = 0.0;
    for (int k = 0; k < C; ++k) {
      const double p = probs(v, k);
      if (p > 0.0) {
        h -= p * std::log(p);
      }
    }
    entropy(v) = log_c > 0.0 ? h / log_c : 0.0;
    weight(v) = d_max > 0.0 ? (deg(v) / d_max) * entropy(v) : 0.0;
  }

  std::vector<double> members(C, 0.0);
  Matrix proto = Matrix::Zero(C, C);
  for (node_t v = 0; v < n; ++v) {
    const int c = assigned[v];
    members[c] += 1.0;
    proto.row(c) += weight(v) * probs.row(v);
  }
  for (int c = 0; c < C; ++c) {
    if (members[c] == 0.0) {
      r.empty_classes.push_back(c);
    } else {
      proto.row(c) /= members[c];
    }
  }

  Matrix dproto = Matrix::Zero(C, C);
  for (int a = 0; a < C; ++a) {
    for (int b = 0; b < C; ++b) {
      if (a == b) {
        continue;
      }
      const Eigen::RowVectorXd diff = proto.row(a) - proto.row(b);
      const double dist = diff.norm();
      const double gap = margin - dist;
      if (gap <= 0.0) {
        continue;
      }
      r.loss += gap / C;
      if (dist > 0.0) {
        dproto.row(a) -= diff / (dist * C);
        dproto.row(b) += diff / (dist * C);
      }
    }
  }

  Vector ddeg = Vector::Zero(n);
  double dd_max = 0.0;
  for (node_t v = 0; v < n; ++v) {
    const int c = assigned[v];
    if (members[c] == 0.0) {
      continue;
    }
    const auto g = dproto.row(c) / members[c];
    r.dprobs.row(v) += weight(v) * g;
    const double dweight = g.dot(probs.row(v));
    if (dweight == 0.0 || d_max <= 0.0) {
      continue;
    }
    const double scale = deg(v) / d_max;
    if (log_c > 0.0) {
      for (int k = 0; k < C; ++k) {
        const double p = probs(v, k);
        if (p > 0.0) {
          r.dprobs(v, k) += dweight * scale * (-(std::log(p) + 1.0)) / log_c;
        }
      }
    }
    ddeg(v) += dweight * entropy(v) / d_max;
    dd_max -= dweight * entropy(v) * deg(v) / (d_max * d_max);
  }
  if (n) {
    ddeg(arg_max) += dd_max;
  }
  for (edge_t e = 0; e < cands.size(); ++e) {
    r.dz(e) = ddeg(cands.src[e]);
  }
  return r;
}

} // namespace gw::diffnet
