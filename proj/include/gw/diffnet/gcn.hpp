#pragma once

#include "gw/candidates.hpp"
#include "gw/diffnet/param.hpp"

#include <vector>

namespace gw::diffnet {

/// Lower clamp of the soft degree in the mean aggregation.
inline constexpr double kDegreeEps = 1e-8;

struct GcnOptions {
  int hidden = 64;
  int layers = 2;
  double dropout = 0.5;
  /// Dropout on the input features; 0 disables it.
  double input_dropout = 0.0;
  bool residual = false;
  bool layernorm = false;
  bool self_loops = true;
};

/// Soft mean aggregation
///   A_i = (sum_e z_e h_dst(e) + s h_i) / max(D_i, eps),  D_i = sum_e z_e + s
/// over the pairs e with src(e) = i, where s = 1 with self-loops and 0 otherwise.
struct Aggregation {
  Matrix out;
  Vector degree;
};
Aggregation aggregate(const cand::CandidateSet& cands, const Vector& z, const Matrix& h,
                      bool self_loops);

/// Stack of mean-aggregation layers h' = act(norm(A(h) W + b)); ReLU and
/// dropout between layers, identity at the output.
class GcnStack {
public:
  GcnStack() = default;
  GcnStack(int in_dim, int num_classes, const GcnOptions& opts, Rng& rng);

  /// Records the tape needed by backward. Dropout is active only when
  /// `dropout_rng` is non-null.
  const Matrix& forward(const Matrix& x, const cand::CandidateSet& cands, const Vector& z,
                        Rng* dropout_rng);

  /// Accumulates parameter gradients and dL/dz (added into `dz`).
  void backward(const Matrix& dlogits, Vector& dz);

  const Matrix& logits() const { return out_; }
  bool has_tape() const { return !tape_.empty(); }

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  const GcnOptions& options() const { return opts_; }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  Param& weight(int l) { return weights_[l]; }
  Param& bias(int l) { return biases_[l]; }

private:
  struct LayerTape {
    Matrix input;
    Aggregation agg;
    Matrix pre;       // A W + b
    Matrix normed;    // after layernorm (== pre without it)
    Vector inv_std;   // layernorm statistics
    Matrix xhat;
    Matrix act;       // after ReLU (hidden layers)
    Matrix keep;      // dropout multipliers (empty when inactive)
    bool residual = false;
  };

  GcnOptions opts_;
  std::vector<Param> weights_;
  std::vector<Param> biases_;
  std::vector<Param> gammas_;
  std::vector<Param> betas_;
  const cand::CandidateSet* cands_ = nullptr;
  Vector z_;
  Matrix input_keep_;
  std::vector<LayerTape> tape_;
  Matrix out_;
};

} // namespace gw::diffnet
