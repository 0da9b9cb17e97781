#include "gw/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace gw::linalg {

Vector singular_values(const Matrix& a, double tol, int max_sweeps) {
  // Work on the orientation with at least as many rows as columns; the
  // nonzero singular values are shared by a and a^T.
  Eigen::MatrixXd work = a.rows() >= a.cols() ? Eigen::MatrixXd(a) : Eigen::MatrixXd(a.transpose());
  const Eigen::Index cols = work.cols();

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < cols; ++p) {
      for (Eigen::Index q = p + 1; q < cols; ++q) {
        const double alpha = work.col(p).squaredNorm();
        const double beta = work.col(q).squaredNorm();
        const double gamma = work.col(p).dot(work.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < work.rows(); ++r) {
          const double ap = work(r, p);
          const double aq = work(r, q);
          work(r, p) = c * ap - s * aq;
          work(r, q) = s * ap + c * aq;
        }
      }
    }
    if (!rotated) {
      break;
    }
  }

  Vector sv(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    sv(j) = work.col(j).norm();
  }
  std::sort(sv.data(), sv.data() + cols, std::greater<>());
  return sv;
}

double smallest_singular_value(const Matrix& a, double tol) {
  if (a.size() == 0) {
    return 0.0;
  }
  const Vector sv = singular_values(a, tol);
  return sv(sv.size() - 1);
}

} // namespace gw::linalg
