#include "gw/diffnet/gcn.hpp"

namespace gw::diffnet {

namespace {

constexpr double kLayerNormEps = 1e-5;

Matrix glorot(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w.data()[i] = dist(rng);
  }
  return w;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  Matrix m(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = keep(rng) ? scale : 0.0;
  }
  return m;
}

} // namespace

Aggregation aggregate(const cand::CandidateSet& cands, const Vector& z, const Matrix& h,
                      bool self_loops) {
  if (z.size() != cands.size()) {
    throw Error("aggregate: weight vector length does not match candidate count");
  }
  if (h.rows() != cands.num_nodes) {
    throw Error("aggregate: feature rows do not match node count");
  }
  const double s = self_loops ? 1.0 : 0.0;
  Aggregation agg;
  agg.out.resize(h.rows(), h.cols());
  agg.degree.resize(h.rows());
  for (node_t i = 0; i < cands.num_nodes; ++i) {
    auto row = agg.out.row(i);
    row = s * h.row(i);
    double d = s;
    for (edge_t e = cands.row_ptr[i]; e < cands.row_ptr[i + 1]; ++e) {
      if (z(e) != 0.0) {
        row += z(e) * h.row(cands.dst[e]);
      }
      d += z(e);
    }
    agg.degree(i) = d;
    row /= std::max(d, kDegreeEps);
  }
  return agg;
}

GcnStack::GcnStack(int in_dim, int num_classes, const GcnOptions& opts, Rng& rng) : opts_(opts) {
  if (opts.layers < 1) {
    throw Error("gcn: need at least one layer");
  }
  if (opts.dropout < 0.0 || opts.dropout >= 1.0 || opts.input_dropout < 0.0 ||
      opts.input_dropout >= 1.0) {
    throw Error("gcn: dropout must lie in [0, 1)");
  }
  int dim = in_dim;
  for (int l = 0; l < opts.layers; ++l) {
    const bool last = l + 1 == opts.layers;
    const int out = last ? num_classes : opts.hidden;
    const std::string tag = "gcn." + std::to_string(l);
    weights_.emplace_back(tag + ".W", glorot(dim, out, rng));
    biases_.emplace_back(tag + ".b", Matrix::Zero(1, out));
    if (opts.layernorm && !last) {
      gammas_.emplace_back(tag + ".ln_gamma", Matrix::Ones(1, out));
      betas_.emplace_back(tag + ".ln_beta", Matrix::Zero(1, out));
    }
    dim = out;
  }
}

const Matrix& GcnStack::forward(const Matrix& x, const cand::CandidateSet& cands, const Vector& z,
                                Rng* dropout_rng) {
  if (x.cols() != weights_.front().value.rows()) {
    throw Error("gcn: feature dimension does not match the first layer");
  }
  cands_ = &cands;
  z_ = z;
  tape_.clear();
  Matrix h = x;
  input_keep_.resize(0, 0);
  if (dropout_rng && opts_.input_dropout > 0.0) {
    input_keep_ = dropout_mask(h.rows(), h.cols(), opts_.input_dropout, *dropout_rng);
    h = h.cwiseProduct(input_keep_);
  }
  const int L = num_layers();
  for (int l = 0; l < L; ++l) {
    const bool last = l + 1 == L;
    LayerTape t;
    t.input = std::move(h);
    t.agg = aggregate(cands, z, t.input, opts_.self_loops);
    t.pre = t.agg.out * weights_[l].value;
    t.pre.rowwise() += biases_[l].value.row(0);
    if (last) {
      out_ = t.pre;
      tape_.push_back(std::move(t));
      break;
    }
    if (opts_.layernorm) {
      const Eigen::Index n = t.pre.rows();
      t.inv_std.resize(n);
      t.xhat.resize(n, t.pre.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = t.pre.row(i).mean();
        const double var = (t.pre.row(i).array() - mu).square().mean();
        t.inv_std(i) = 1.0 / std::sqrt(var + kLayerNormEps);
        t.xhat.row(i) = (t.pre.row(i).array() - mu) * t.inv_std(i);
      }
      t.normed = t.xhat.array().rowwise() * gammas_[l].value.row(0).array();
      t.normed.rowwise() += betas_[l].value.row(0);
    } else {
      t.normed = t.pre;
    }
    t.act = t.normed.cwiseMax(0.0);
    h = t.act;
    if (dropout_rng && opts_.dropout > 0.0) {
      t.keep = dropout_mask(h.rows(), h.cols(), opts_.dropout, *dropout_rng);
      h = h.cwiseProduct(t.keep);
    }
    t.residual = opts_.residual && t.input.cols() == h.cols();
    if (t.residual) {
      h += t.input;
    }
    tape_.push_back(std::move(t));
  }
  return out_;
}

void GcnStack::backward(const Matrix& dlogits, Vector& dz) {
  if (tape_.empty() || cands_ == nullptr) {
    throw Error("gcn: backward called before forward");
  }
  if (dz.size() != z_.size()) {
    throw Error("gcn: dz length does not match the recorded adjacency");
  }
  const cand::CandidateSet& cands = *cands_;
  const double s = opts_.self_loops ? 1.0 : 0.0;
  Matrix dout = dlogits;
  for (int l = num_layers() - 1; l >= 0; --l) {
    LayerTape& t = tape_[l];
    const bool last = l + 1 == num_layers();
    Matrix dpre;
    Matrix dinput_skip;
    if (last) {
      dpre = dout;
    } else {
      if (t.residual) {
        dinput_skip = dout;
      }
      Matrix dact = t.keep.size() ? Matrix(dout.cwiseProduct(t.keep)) : dout;
      Matrix dnormed = dact.cwiseProduct((t.normed.array() > 0.0).cast<double>().matrix());
      if (opts_.layernorm) {
        gammas_[l].grad.row(0) += dnormed.cwiseProduct(t.xhat).colwise().sum();
        betas_[l].grad.row(0) += dnormed.colwise().sum();
        const Matrix dxhat = dnormed.array().rowwise() * gammas_[l].value.row(0).array();
        dpre.resize(dxhat.rows(), dxhat.cols());
        const double h = static_cast<double>(dxhat.cols());
        for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
          const double mean_d = dxhat.row(i).sum() / h;
          const double mean_dx = dxhat.row(i).dot(t.xhat.row(i)) / h;
          dpre.row(i) =
              t.inv_std(i) * (dxhat.row(i).array() - mean_d - t.xhat.row(i).array() * mean_dx).matrix();
        }
      } else {
        dpre = std::move(dnormed);
      }
    }
    weights_[l].grad.noalias() += t.agg.out.transpose() * dpre;
    biases_[l].grad.row(0) += dpre.colwise().sum();
    const Matrix dagg = dpre * weights_[l].value.transpose();

    const bool need_input = l > 0;
    Matrix dinput;
    if (need_input) {
      dinput = Matrix::Zero(t.input.rows(), t.input.cols());
    }
    for (node_t i = 0; i < cands.num_nodes; ++i) {
      const double d = t.agg.degree(i);
      const bool clamped = d < kDegreeEps;
      const double denom = clamped ? kDegreeEps : d;
      const auto da = dagg.row(i);
      if (need_input && s != 0.0) {
        dinput.row(i) += (s / denom) * da;
      }
      for (edge_t e = cands.row_ptr[i]; e < cands.row_ptr[i + 1]; ++e) {
        const node_t j = cands.dst[e];
        if (clamped) {
          dz(e) += da.dot(t.input.row(j)) / denom;
        } else {
          dz(e) += (da.dot(t.input.row(j)) - da.dot(t.agg.out.row(i))) / denom;
        }
        if (need_input && z_(e) != 0.0) {
          dinput.row(j) += (z_(e) / denom) * da;
        }
      }
    }
    if (need_input) {
      if (dinput_skip.size()) {
        dinput += dinput_skip;
      }
      dout = std::move(dinput);
    }
  }
}

std::vector<Param*> GcnStack::params() {
  std::vector<Param*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
    if (l < gammas_.size()) {
      out.push_back(&gammas_[l]);
      out.push_back(&betas_[l]);
    }
  }
  return out;
}

std::vector<const Param*> GcnStack::params() const {
  std::vector<const Param*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
    if (l < gammas_.size()) {
      out.push_back(&gammas_[l]);
      out.push_back(&betas_[l]);
    }
  }
  return out;
}

} // namespace gw::diffnet
