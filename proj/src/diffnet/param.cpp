#include "gw/diffnet/param.hpp"

namespace gw::diffnet {

Adam::Adam(std::vector<Param*> params, AdamOptions opts)
    : params_(std::move(params)), opts_(opts) {
  for (const Param* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, t_);
  const double c2 = 1.0 - std::pow(opts_.beta2, t_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Param& p = *params_[k];
    if (p.grad.rows() != m_[k].rows() || p.grad.cols() != m_[k].cols()) {
      throw Error("adam: state shape mismatch for parameter " + p.name);
    }
    Matrix g = p.grad;
    if (opts_.weight_decay > 0.0) {
      g += opts_.weight_decay * p.value;
    }
    m_[k] = opts_.beta1 * m_[k] + (1.0 - opts_.beta1) * g;
    v_[k] = opts_.beta2 * v_[k] + (1.0 - opts_.beta2) * g.cwiseAbs2();
    p.value.array() -=
        opts_.lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + opts_.eps);
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) {
    p->zero_grad();
  }
}

} // namespace gw::diffnet
