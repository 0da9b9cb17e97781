#pragma once

#include "gw/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gw::decompose {

enum class Covariance { kFull, kDiagonal };

struct GmmOptions {
  int max_iter = 200;
  /// EM stops once the log-likelihood improves by less than this.
  double tol = 1e-6;
  /// Diagonal: lower bound of every variance. Full: ridge added to the
  /// covariance diagonal.
  double var_floor = 1e-6;
  /// Independent k-means++ initialisations; the best final fit is kept.
  int restarts = 3;
  Covariance covariance = Covariance::kFull;
};

/// Gaussian mixture with full or diagonal covariances.
struct GmmModel {
  int k = 0;
  Covariance covariance = Covariance::kFull;
  Vector weights;     // k
  Matrix means;       // k x D
  /// Covariance diagonals, k x D, every entry >= var_floor.
  Matrix variances;
  /// Full covariances (D x D each); empty in diagonal mode.
  std::vector<Matrix> covariances;
  double log_likelihood = 0.0;
  /// Log-likelihood after every E-step of the winning restart.
  std::vector<double> ll_history;
};

/// EM with k-means++ seeding. Requires points.rows() >= k >= 1.
GmmModel fit_gmm(const Matrix& points, int k, std::uint64_t seed, const GmmOptions& opts = {});

/// Row-normalised posterior component probabilities, N x k.
Matrix responsibilities(const GmmModel& model, const Matrix& points);
double log_likelihood(const GmmModel& model, const Matrix& points);

/// Free parameters of a k-component mixture in `dim` dimensions: (k - 1)
/// weights, k*dim means, and k*dim variances (diagonal) or k*dim*(dim+1)/2
/// covariance entries (full).
int num_free_parameters(int k, int dim, Covariance covariance = Covariance::kFull);

/// -2 log L + p ln N; lower is better.
double bic(const GmmModel& model, const Matrix& points);

struct ComponentSelection {
  int best_k = 1;
  std::vector<double> bic_curve;  // bic_curve[k - 1]
  GmmModel best_model;
};

/// Fits k = 1..min(k_max, N) and keeps the BIC minimiser.
ComponentSelection select_components(const Matrix& points, int k_max, std::uint64_t seed,
                                     const GmmOptions& opts = {});

struct ClassDecomposition {
  int cls = 0;
  /// Mixture size chosen by BIC (0 if the class has no node with neighbors).
  int gmm_k = 0;
  /// Pseudo-classes emitted for this class, including the isolated-node one.
  int num_pseudo = 0;
  int isolated_nodes = 0;
  std::vector<double> bic_curve;
};

struct Decomposition {
  std::vector<ClassDecomposition> classes;
  /// Pseudo-label per node; kUnlabeled where the original label is missing.
  std::vector<int> pseudo_labels;
  /// pseudo id -> original class.
  std::vector<int> pseudo_to_class;

  int num_pseudo() const { return static_cast<int>(pseudo_to_class.size()); }
};

/// Splits every class into the mixture components of its nodes' empirical
/// 1-hop label distributions. Nodes without labeled neighbors of class c form
/// one dedicated extra pseudo-class for c.
Decomposition decompose_classes(const Graph& graph, int k_max = 25, std::uint64_t seed = 0,
                                const GmmOptions& opts = {});

/// Same graph with pseudo-labels as classes.
Graph relabel_graph(const Graph& graph, const Decomposition& decomposition);

/// Maps pseudo-labels (e.g. predictions on a relabeled graph) to the original classes.
std::vector<int> back_map(std::span<const int> pseudo_labels, const Decomposition& decomposition);

} // namespace gw::decompose
