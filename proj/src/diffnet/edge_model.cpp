#include "gw/diffnet/edge_model.hpp"

namespace gw::diffnet {

EdgeModel::EdgeModel(int dim, const EdgeModelOptions& opts, Rng& rng) : learn_prior_(opts.learn_prior) {
  if (opts.rank < 1 || dim < 1) {
    throw Error("edge model: rank and feature dimension must be >= 1");
  }
  std::normal_distribution<double> normal(0.0, opts.init_scale / std::sqrt(static_cast<double>(dim)));
  Matrix u(dim, opts.rank);
  Matrix v(dim, opts.rank);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    u.data()[i] = normal(rng);
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v.data()[i] = normal(rng);
  }
  u_ = Param("edge.U", std::move(u));
  v_ = Param("edge.V", std::move(v));
  b_ = Param("edge.b", Matrix::Constant(1, 1, opts.bias_init));
  beta_ = Param("edge.beta", Matrix::Constant(1, 1, opts.prior_init));
}

void EdgeModel::check(const Matrix& x, const cand::CandidateSet& cands) const {
  if (x.cols() != u_.value.rows()) {
    throw Error("edge model: feature dimension " + std::to_string(x.cols()) +
                " does not match factor rows " + std::to_string(u_.value.rows()));
  }
  if (x.rows() != cands.num_nodes) {
    throw Error("edge model: candidate set built for a different node count");
  }
}

Vector EdgeModel::logits(const Matrix& x, const cand::CandidateSet& cands) const {
  check(x, cands);
  const Matrix p = x * u_.value;
  const Matrix q = x * v_.value;
  const double b = b_.value(0, 0);
  const double beta = beta_.value(0, 0);
  Vector theta(cands.size());
  for (edge_t e = 0; e < cands.size(); ++e) {
    theta(e) = p.row(cands.src[e]).dot(q.row(cands.dst[e])) + b +
               (cands.existing[e] ? beta : 0.0);
  }
  return theta;
}

void EdgeModel::backward(const Matrix& x, const cand::CandidateSet& cands, const Vector& dtheta) {
  check(x, cands);
  const Matrix p = x * u_.value;
  const Matrix q = x * v_.value;
  Matrix dp = Matrix::Zero(p.rows(), p.cols());
  Matrix dq = Matrix::Zero(q.rows(), q.cols());
  double db = 0.0;
  double dbeta = 0.0;
  for (edge_t e = 0; e < cands.size(); ++e) {
    const double g = dtheta(e);
    if (g == 0.0) {
      continue;
    }
    dp.row(cands.src[e]) += g * q.row(cands.dst[e]);
    dq.row(cands.dst[e]) += g * p.row(cands.src[e]);
    db += g;
    if (cands.existing[e]) {
      dbeta += g;
    }
  }
  u_.grad.noalias() += x.transpose() * dp;
  v_.grad.noalias() += x.transpose() * dq;
  b_.grad(0, 0) += db;
  if (learn_prior_) {
    beta_.grad(0, 0) += dbeta;
  }
}

std::vector<Param*> EdgeModel::params() {
  if (learn_prior_) {
    return {&u_, &v_, &b_, &beta_};
  }
  return {&u_, &v_, &b_};
}

std::vector<const Param*> EdgeModel::params() const {
  if (learn_prior_) {
    return {&u_, &v_, &b_, &beta_};
  }
  return {&u_, &v_, &b_};
}

} // namespace gw::diffnet
