#include "gw/decompose.hpp"

#include "gw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gw::decompose {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-point log joint densities log(pi_j) + log N(x | mu_j, Sigma_j), N x k.
Matrix log_joint(const GmmModel& m, const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Matrix out(n, m.k);
  for (int j = 0; j < m.k; ++j) {
    const double log_w = m.weights(j) > 0.0 ? std::log(m.weights(j)) : kNegInf;
    const Matrix centred = x.rowwise() - m.means.row(j);
    if (m.covariance == Covariance::kFull) {
      const Eigen::LLT<Eigen::MatrixXd> llt(m.covariances[j]);
      if (llt.info() != Eigen::Success) {
        throw Error("fit_gmm: covariance is not positive definite");
      }
      const Eigen::MatrixXd l = llt.matrixL();
      const double log_det = 2.0 * l.diagonal().array().log().sum();
      const Eigen::MatrixXd solved = l.triangularView<Eigen::Lower>().solve(centred.transpose());
      const Eigen::RowVectorXd quad = solved.colwise().squaredNorm();
      for (Eigen::Index i = 0; i < n; ++i) {
        out(i, j) = log_w - 0.5 * (dim * log_2pi + log_det + quad(i));
      }
    } else {
      const double log_det = m.variances.row(j).array().log().sum();
      const Eigen::RowVectorXd inv = m.variances.row(j).cwiseInverse();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double quad = (centred.row(i).cwiseAbs2().cwiseProduct(inv)).sum();
        out(i, j) = log_w - 0.5 * (dim * log_2pi + log_det + quad);
      }
    }
  }
  return out;
}

/// Normalises log_joint rows in place into responsibilities; returns total log-likelihood.
double normalise_rows(Matrix& lj) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double mx = lj.row(i).maxCoeff();
    double s = 0.0;
    for (Eigen::Index j = 0; j < lj.cols(); ++j) {
      lj(i, j) = std::exp(lj(i, j) - mx);
      s += lj(i, j);
    }
    lj.row(i) /= s;
    ll += mx + std::log(s);
  }
  return ll;
}

void m_step(GmmModel& m, const Matrix& x, const Matrix& resp, double var_floor) {
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  for (int j = 0; j < m.k; ++j) {
    const double nj = resp.col(j).sum();
    m.weights(j) = nj / static_cast<double>(n);
    if (nj <= 0.0) {
      // Dead component: weight 0 keeps it out of the likelihood.
      m.variances.row(j).setConstant(var_floor);
      if (m.covariance == Covariance::kFull) {
        m.covariances[j] = Matrix::Identity(dim, dim) * var_floor;
      }
      continue;
    }
    const Eigen::RowVectorXd mean = (resp.col(j).transpose() * x) / nj;
    const Matrix centred = x.rowwise() - mean;
    m.means.row(j) = mean;
    if (m.covariance == Covariance::kFull) {
      Matrix cov = centred.transpose() * resp.col(j).asDiagonal() * centred / nj;
      cov.diagonal().array() += var_floor;
      m.variances.row(j) = cov.diagonal().transpose();
      m.covariances[j] = std::move(cov);
    } else {
      const Eigen::RowVectorXd var = (resp.col(j).transpose() * centred.cwiseAbs2()) / nj;
      m.variances.row(j) = var.cwiseMax(var_floor);
    }
  }
}

/// k-means++ centres followed by a hard nearest-centre assignment.
Matrix kmeanspp_responsibilities(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> centres;
  centres.push_back(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i) = (x.row(i) - x.row(centres[0])).squaredNorm();
  }
  while (static_cast<int>(centres.size()) < k) {
    const double total = d2.sum();
    Eigen::Index next = 0;
    if (total <= 0.0) {
      next = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    } else {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      next = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u < 0.0) {
          next = i;
          break;
        }
      }
    }
    centres.push_back(next);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (x.row(i) - x.row(next)).squaredNorm());
    }
  }
  Matrix resp = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const double d = (x.row(i) - x.row(centres[j])).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    resp(i, best) = 1.0;
  }
  return resp;
}

GmmModel fit_once(const Matrix& x, int k, Rng& rng, const GmmOptions& opts) {
  GmmModel m;
  m.k = k;
  m.covariance = opts.covariance;
  if (opts.covariance == Covariance::kFull) {
    m.covariances.assign(k, Matrix::Identity(x.cols(), x.cols()) * opts.var_floor);
  }
  m.weights = Vector::Zero(k);
  m.means = Matrix::Zero(k, x.cols());
  m.variances = Matrix::Constant(k, x.cols(), opts.var_floor);
  m_step(m, x, kmeanspp_responsibilities(x, k, rng), opts.var_floor);

  double prev = kNegInf;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Matrix resp = log_joint(m, x);
    const double ll = normalise_rows(resp);
    m.ll_history.push_back(ll);
    m.log_likelihood = ll;
    if (ll - prev < opts.tol) {
      break;
    }
    prev = ll;
    if (iter + 1 == opts.max_iter) {
      break;
    }
    m_step(m, x, resp, opts.var_floor);
  }
  return m;
}

} // namespace

GmmModel fit_gmm(const Matrix& points, int k, std::uint64_t seed, const GmmOptions& opts) {
  if (k < 1) {
    throw Error("fit_gmm: k must be >= 1");
  }
  if (points.rows() < k) {
    throw Error("fit_gmm: fewer points (" + std::to_string(points.rows()) +
                ") than components (" + std::to_string(k) + ")");
  }
  GmmModel best;
  bool have = false;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    GmmModel m = fit_once(points, k, rng, opts);
    if (!have || m.log_likelihood > best.log_likelihood) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

Matrix responsibilities(const GmmModel& model, const Matrix& points) {
  Matrix lj = log_joint(model, points);
  normalise_rows(lj);
  return lj;
}

double log_likelihood(const GmmModel& model, const Matrix& points) {
  Matrix lj = log_joint(model, points);
  return normalise_rows(lj);
}

int num_free_parameters(int k, int dim, Covariance covariance) {
  const int spread = covariance == Covariance::kFull ? dim * (dim + 1) / 2 : dim;
  return (k - 1) + k * dim + k * spread;
}

double bic(const GmmModel& model, const Matrix& points) {
  const double n = static_cast<double>(points.rows());
  const int p = num_free_parameters(model.k, static_cast<int>(points.cols()), model.covariance);
  return -2.0 * log_likelihood(model, points) + p * std::log(n);
}

ComponentSelection select_components(const Matrix& points, int k_max, std::uint64_t seed,
                                     const GmmOptions& opts) {
  if (points.rows() < 1) {
    throw Error("select_components: no points");
  }
  const int upper = static_cast<int>(std::min<Eigen::Index>(std::max(k_max, 1), points.rows()));
  ComponentSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= upper; ++k) {
    GmmModel m = fit_gmm(points, k, derive_seed(seed, static_cast<std::uint64_t>(k)), opts);
    const double b = bic(m, points);
    sel.bic_curve.push_back(b);
    if (b < best) {
      best = b;
      sel.best_k = k;
      sel.best_model = std::move(m);
    }
  }
  return sel;
}

Decomposition decompose_classes(const Graph& graph, int k_max, std::uint64_t seed,
                                const GmmOptions& opts) {
  if (!graph.has_labels()) {
    throw Error("decompose_classes: graph has no labels");
  }
  const int C = graph.num_classes();
  const auto& y = graph.labels();
  const auto dists = metrics::neighborhood_distributions(graph, y, C);

  Decomposition dec;
  dec.pseudo_labels.assign(graph.num_nodes(), kUnlabeled);
  for (int c = 0; c < C; ++c) {
    ClassDecomposition cd;
    cd.cls = c;
    std::vector<node_t> with_neighbors;
    std::vector<node_t> isolated;
    for (node_t v = 0; v < graph.num_nodes(); ++v) {
      if (y[v] != c) {
        continue;
      }
      (dists[v].uniform_fallback ? isolated : with_neighbors).push_back(v);
    }
    if (!with_neighbors.empty()) {
      Matrix pts(static_cast<Eigen::Index>(with_neighbors.size()), C);
      for (std::size_t i = 0; i < with_neighbors.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = dists[with_neighbors[i]].probs.transpose();
      }
      ComponentSelection sel =
          select_components(pts, k_max, derive_seed(seed, static_cast<std::uint64_t>(c)), opts);
      cd.gmm_k = sel.best_k;
      cd.bic_curve = sel.bic_curve;
      const Matrix resp = responsibilities(sel.best_model, pts);
      // Components that win no node are dropped so ids stay dense.
      std::vector<int> remap(sel.best_k, -1);
      for (std::size_t i = 0; i < with_neighbors.size(); ++i) {
        Eigen::Index comp = 0;
        resp.row(static_cast<Eigen::Index>(i)).maxCoeff(&comp);
        if (remap[comp] < 0) {
          remap[comp] = dec.num_pseudo();
          dec.pseudo_to_class.push_back(c);
          ++cd.num_pseudo;
        }
        dec.pseudo_labels[with_neighbors[i]] = remap[comp];
      }
    }
    if (!isolated.empty()) {
      const int id = dec.num_pseudo();
      dec.pseudo_to_class.push_back(c);
      ++cd.num_pseudo;
      cd.isolated_nodes = static_cast<int>(isolated.size());
      for (node_t v : isolated) {
        dec.pseudo_labels[v] = id;
      }
    }
    dec.classes.push_back(std::move(cd));
  }
  return dec;
}

Graph relabel_graph(const Graph& graph, const Decomposition& decomposition) {
  if (static_cast<node_t>(decomposition.pseudo_labels.size()) != graph.num_nodes()) {
    throw Error("relabel_graph: decomposition does not match graph");
  }
  return graph.with_labels(decomposition.pseudo_labels, decomposition.num_pseudo());
}

std::vector<int> back_map(std::span<const int> pseudo_labels, const Decomposition& decomposition) {
  std::vector<int> out(pseudo_labels.size(), kUnlabeled);
  for (std::size_t i = 0; i < pseudo_labels.size(); ++i) {
    const int p = pseudo_labels[i];
    if (p == kUnlabeled) {
      continue;
    }
    if (p < 0 || p >= decomposition.num_pseudo()) {
      throw Error("back_map: pseudo-label out of range");
    }
    out[i] = decomposition.pseudo_to_class[p];
  }
  return out;
}

} // namespace gw::decompose
