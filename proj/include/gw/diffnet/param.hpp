#pragma once

#include "gw/common.hpp"

#include <string>
#include <vector>

namespace gw::diffnet {

/// Trainable tensor with a gradient accumulator of identical shape.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string param_name, Matrix init)
      : name(std::move(param_name)), value(std::move(init)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Coupled L2 penalty added to the gradient.
  double weight_decay = 0.0;
};

/// Adam with bias correction. Moment buffers are keyed by parameter position.
class Adam {
public:
  explicit Adam(std::vector<Param*> params, AdamOptions opts = {});

  void step();
  void zero_grad();
  int steps() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return opts_; }
  const std::vector<Matrix>& first_moments() const noexcept { return m_; }
  const std::vector<Matrix>& second_moments() const noexcept { return v_; }

private:
  std::vector<Param*> params_;
  AdamOptions opts_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  int t_ = 0;
};

} // namespace gw::diffnet
