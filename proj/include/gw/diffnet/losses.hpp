#pragma once

#include "gw/candidates.hpp"
#include "gw/common.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gw::diffnet {

struct CrossEntropy {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean over masked nodes of -log softmax(logits)[y].
CrossEntropy cross_entropy(const Matrix& logits, std::span<const int> labels,
                           std::span<const std::uint8_t> mask);

Matrix softmax_rows(const Matrix& logits);

/// One-hot rows for training nodes, softmax predictions elsewhere.
struct SoftLabels {
  Matrix probs;
  /// 1 where the row is a fixed one-hot training label.
  std::vector<std::uint8_t> fixed;
  /// Training label, or the argmax of the prediction.
  std::vector<int> assigned;
};

SoftLabels soft_labels(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::uint8_t> train_mask);

/// Pulls dL/dprobs back through the softmax; fixed rows receive no gradient.
Matrix soft_labels_backward(const SoftLabels& soft, const Matrix& dprobs);

enum class Regularizer { kNone, kDegree, kLabel, kNcon, kInter };

std::string to_string(Regularizer r);
/// Accepts "none", "deg", "label", "ncon" and "inter".
Regularizer regularizer_from_string(const std::string& s);

struct RegResult {
  double loss = 0.0;
  Vector dz;
  /// dL/dprobs; empty when the term does not depend on labels.
  Matrix dprobs;
  /// Classes without members (interclass term only).
  std::vector<int> empty_classes;
};

/// Soft out-degree sum_e z_e of every node.
Vector soft_degrees(const cand::CandidateSet& cands, const Vector& z);

/// (1/n) sum_i ReLU(d* - d_i + delta)^2 over soft degrees.
RegResult degree_reg(const cand::CandidateSet& cands, const Vector& z, double d_star,
                     double delta);

/// sum_e z_e (1 - <y_i, y_j>) / sum_e z_e. Throws when sum_e z_e == 0.
RegResult label_consistency_reg(const cand::CandidateSet& cands, const Vector& z,
                                const Matrix& probs);

/// sum_e z_e (1 - <p_i, p_j>) / sum_e z_e with the self-inclusive aggregation
/// p_i = (y_i + sum_e z_e y_j) / (1 + sum_e z_e). Zero when sum_e z_e == 0.
RegResult neighborhood_consistency_reg(const cand::CandidateSet& cands, const Vector& z,
                                       const Matrix& probs);

/// (1/C) sum over ordered class pairs c != c' of ReLU(m - ||r_c - r_c'||) with
/// prototypes r_c = mean over assigned members v of w_v y_v and
/// w_v = (d_v / max_u d_u) * (H(y_v) / ln C).
RegResult interclass_reg(const cand::CandidateSet& cands, const Vector& z, const Matrix& probs,
                         std::span<const int> assigned, double margin);

} // namespace gw::diffnet
