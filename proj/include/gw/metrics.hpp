#pragma once

#include "gw/graph.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gw::metrics {

// All label-based measures only look at edges whose endpoints are both
// labeled; unlabeled nodes (kUnlabeled) are ignored.

/// Fraction of stored (directed) edges joining same-class endpoints.
double edge_homophily(const Graph& graph);

/// Edge homophily recentred by the degree-weighted class distribution,
/// evaluated on the symmetrized graph. Throws when 1 - sum p(c)^2 == 0.
double adjusted_homophily(const Graph& graph);

/// I(y_v, y_w) / H(y_v) over the symmetrized edge list, with 0 log 0 = 0.
/// Throws when the degree-weighted label marginal has zero entropy.
double label_informativeness(const Graph& graph);

struct NeighborhoodDistribution {
  node_t node = 0;
  Vector probs;
  /// Set for nodes without labeled out-neighbors; probs is then uniform.
  bool uniform_fallback = false;
};

/// Empirical 1-hop label histogram of each node's labeled out-neighbors.
std::vector<NeighborhoodDistribution> neighborhood_distributions(const Graph& graph,
                                                                 std::span<const int> labels,
                                                                 int num_classes);

struct ClassStd {
  /// Population std per coordinate, averaged over coordinates.
  std::vector<double> per_class;
  /// Unweighted mean over classes with at least one contributing node.
  double average = 0.0;
  /// Classes without any labeled node that has labeled neighbors.
  std::vector<int> empty_classes;
};

/// Spread of the neighborhood distributions inside each class. Nodes without
/// labeled neighbors are excluded.
ClassStd class_neighborhood_std(const Graph& graph);

struct MetricsReport {
  std::optional<double> h_edge;
  std::optional<double> h_adj;
  std::optional<double> li;
  ClassStd neighborhood_std;
  DegreeStats degrees;
  std::vector<std::string> warnings;
};

/// Computes every measure, recording failures as warnings instead of throwing.
MetricsReport compute_report(const Graph& graph);

/// Mean of out-neighbor rows without self-loops; isolated nodes get zeros.
Matrix mean_aggregate(const Graph& graph, const Matrix& x);

struct GapResult {
  double lhs_estimate = 0.0;
  double lhs_stderr = 0.0;
  double rhs_bound = 0.0;
  double sigma_min = 0.0;
  bool holds = false;
};

/// Monte-Carlo check of the embedding-distance lower bound for single-layer
/// mean aggregation h_i = mean_{k in N(i)} x_k W (no self-loops):
///   E ||h_i - h_j|| >= sigma_min(W) * ||mu_a - mu_b||
/// for i drawn from comp_a and j from comp_b. mu_a / mu_b default to the
/// empirical means of the aggregated neighbor features over each set; pass
/// `component_means` to substitute known means. `holds` is
/// lhs >= rhs - 3 * stderr.
GapResult theorem1_gap(const Graph& graph, const Matrix& weight,
                       std::span<const node_t> comp_a, std::span<const node_t> comp_b,
                       int trials, std::uint64_t seed,
                       const std::optional<std::pair<Vector, Vector>>& component_means = {});

} // namespace gw::metrics
