#include "gw/metrics.hpp"

#include "gw/linalg.hpp"

#include <cmath>

namespace gw::metrics {

namespace {

void require_labels(const Graph& graph) {
  if (!graph.has_labels()) {
    throw Error("graph has no labels");
  }
}

bool labeled(const std::vector<int>& y, node_t v) { return y[v] != kUnlabeled; }

/// Class-pair counts over the symmetric closure of the labeled subgraph.
/// counts(c1, c2) counts directed edges v->w with y_v = c1, y_w = c2.
Eigen::MatrixXd symmetric_pair_counts(const Graph& graph) {
  const Graph sym = to_undirected(graph);
  const auto& y = sym.labels();
  const int C = sym.num_classes();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(C, C);
  for (node_t v = 0; v < sym.num_nodes(); ++v) {
    if (!labeled(y, v)) {
      continue;
    }
    for (node_t w : sym.neighbors(v)) {
      if (labeled(y, w)) {
        counts(y[v], y[w]) += 1.0;
      }
    }
  }
  return counts;
}

} // namespace

double edge_homophily(const Graph& graph) {
  require_labels(graph);
  const auto& y = graph.labels();
  double same = 0.0;
  double total = 0.0;
  for (node_t v = 0; v < graph.num_nodes(); ++v) {
    if (!labeled(y, v)) {
      continue;
    }
    for (node_t w : graph.neighbors(v)) {
      if (!labeled(y, w)) {
        continue;
      }
      total += 1.0;
      same += (y[v] == y[w]) ? 1.0 : 0.0;
    }
  }
  if (total == 0.0) {
    throw Error("edge homophily undefined on an empty edge set");
  }
  return same / total;
}

double adjusted_homophily(const Graph& graph) {
  require_labels(graph);
  const Eigen::MatrixXd counts = symmetric_pair_counts(graph);
  const double total = counts.sum();
  if (total == 0.0) {
    throw Error("adjusted homophily undefined on an empty edge set");
  }
  const double h_edge = counts.trace() / total;
  // Row sums are the degree mass of each class; total equals 2|E|.
  const Eigen::VectorXd p_bar = counts.rowwise().sum() / total;
  const double expected = p_bar.squaredNorm();
  const double denom = 1.0 - expected;
  if (std::abs(denom) < 1e-15) {
    throw Error("adjusted homophily undefined: a single class carries all edge mass");
  }
  return (h_edge - expected) / denom;
}

double label_informativeness(const Graph& graph) {
  require_labels(graph);
  const Eigen::MatrixXd counts = symmetric_pair_counts(graph);
  const double total = counts.sum();
  if (total == 0.0) {
    throw Error("label informativeness undefined on an empty edge set");
  }
  const Eigen::MatrixXd joint = counts / total;
  const Eigen::VectorXd p_bar = joint.rowwise().sum();
  const int C = static_cast<int>(p_bar.size());

  double entropy = 0.0;
  for (int c = 0; c < C; ++c) {
    if (p_bar(c) > 0.0) {
      entropy -= p_bar(c) * std::log(p_bar(c));
    }
  }
  if (entropy <= 0.0) {
    throw Error("label informativeness undefined: zero-entropy label marginal");
  }
  double mutual = 0.0;
  for (int a = 0; a < C; ++a) {
    for (int b = 0; b < C; ++b) {
      const double p = joint(a, b);
      if (p > 0.0) {
        mutual += p * std::log(p / (p_bar(a) * p_bar(b)));
      }
    }
  }
  return mutual / entropy;
}

std::vector<NeighborhoodDistribution> neighborhood_distributions(const Graph& graph,
                                                                 std::span<const int> labels,
                                                                 int num_classes) {
  if (static_cast<node_t>(labels.size()) != graph.num_nodes()) {
    throw Error("label vector length does not match node count");
  }
  std::vector<NeighborhoodDistribution> out(graph.num_nodes());
  for (node_t v = 0; v < graph.num_nodes(); ++v) {
    auto& nd = out[v];
    nd.node = v;
    nd.probs = Vector::Zero(num_classes);
    double count = 0.0;
    for (node_t w : graph.neighbors(v)) {
      if (labels[w] != kUnlabeled) {
        nd.probs(labels[w]) += 1.0;
        count += 1.0;
      }
    }
    if (count == 0.0) {
      nd.probs.setConstant(1.0 / num_classes);
      nd.uniform_fallback = true;
    } else {
      nd.probs /= count;
    }
  }
  return out;
}

ClassStd class_neighborhood_std(const Graph& graph) {
  require_labels(graph);
  const int C = graph.num_classes();
  const auto& y = graph.labels();
  const auto dists = neighborhood_distributions(graph, y, C);

  ClassStd result;
  result.per_class.assign(C, 0.0);
  std::vector<Vector> sum(C, Vector::Zero(C));
  std::vector<Vector> sum_sq(C, Vector::Zero(C));
  std::vector<double> count(C, 0.0);
  for (node_t v = 0; v < graph.num_nodes(); ++v) {
    if (y[v] == kUnlabeled || dists[v].uniform_fallback) {
      continue;
    }
    sum[y[v]] += dists[v].probs;
    sum_sq[y[v]] += dists[v].probs.cwiseAbs2();
    count[y[v]] += 1.0;
  }
  double total = 0.0;
  int contributing = 0;
  for (int c = 0; c < C; ++c) {
    if (count[c] == 0.0) {
      result.empty_classes.push_back(c);
      continue;
    }
    const Vector mean = sum[c] / count[c];
    const Vector var = (sum_sq[c] / count[c] - mean.cwiseAbs2()).cwiseMax(0.0);
    result.per_class[c] = var.cwiseSqrt().mean();
    total += result.per_class[c];
    ++contributing;
  }
  result.average = contributing ? total / contributing : 0.0;
  return result;
}

MetricsReport compute_report(const Graph& graph) {
  MetricsReport r;
  r.degrees = degree_stats(graph);
  auto attempt = [&](std::optional<double>& slot, auto&& fn, const char* name) {
    try {
      slot = fn(graph);
    } catch (const Error& e) {
      r.warnings.push_back(std::string(name) + ": " + e.what());
    }
  };
  if (!graph.has_labels()) {
    r.warnings.push_back("graph has no labels; label measures skipped");
    return r;
  }
  attempt(r.h_edge, edge_homophily, "h_edge");
  attempt(r.h_adj, adjusted_homophily, "h_adj");
  attempt(r.li, label_informativeness, "li");
  r.neighborhood_std = class_neighborhood_std(graph);
  for (int c : r.neighborhood_std.empty_classes) {
    r.warnings.push_back("class " + std::to_string(c) +
                         " has no node with labeled neighbors; std set to 0");
  }
  return r;
}

Matrix mean_aggregate(const Graph& graph, const Matrix& x) {
  Matrix out = Matrix::Zero(graph.num_nodes(), x.cols());
  for (node_t v = 0; v < graph.num_nodes(); ++v) {
    const auto row = graph.neighbors(v);
    if (row.empty()) {
      continue;
    }
    for (node_t w : row) {
      out.row(v) += x.row(w);
    }
    out.row(v) /= static_cast<double>(row.size());
  }
  return out;
}

GapResult theorem1_gap(const Graph& graph, const Matrix& weight,
                       std::span<const node_t> comp_a, std::span<const node_t> comp_b,
                       int trials, std::uint64_t seed,
                       const std::optional<std::pair<Vector, Vector>>& component_means) {
  if (comp_a.empty() || comp_b.empty()) {
    throw Error("theorem1_gap: empty component set");
  }
  if (weight.rows() != graph.feature_dim()) {
    throw Error("theorem1_gap: weight rows must equal feature dimension");
  }
  if (trials < 2) {
    throw Error("theorem1_gap: need at least two trials");
  }
  const Matrix agg = mean_aggregate(graph, graph.features());
  const Matrix h = agg * weight;

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_a(0, comp_a.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, comp_b.size() - 1);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const node_t i = comp_a[pick_a(rng)];
    const node_t j = comp_b[pick_b(rng)];
    const double dist = (h.row(i) - h.row(j)).norm();
    sum += dist;
    sum_sq += dist * dist;
  }
  GapResult r;
  r.lhs_estimate = sum / trials;
  const double var = std::max(0.0, (sum_sq - trials * r.lhs_estimate * r.lhs_estimate) / (trials - 1));
  r.lhs_stderr = std::sqrt(var / trials);

  Vector mu_a;
  Vector mu_b;
  if (component_means) {
    mu_a = component_means->first;
    mu_b = component_means->second;
  } else {
    mu_a = Vector::Zero(agg.cols());
    mu_b = Vector::Zero(agg.cols());
    for (node_t i : comp_a) {
      mu_a += agg.row(i).transpose();
    }
    for (node_t j : comp_b) {
      mu_b += agg.row(j).transpose();
    }
    mu_a /= static_cast<double>(comp_a.size());
    mu_b /= static_cast<double>(comp_b.size());
  }
  // x W with x in R^d only admits a positive lower gain when W has at least as
  // many columns as rows; otherwise W has a nontrivial left null space.
  r.sigma_min = weight.cols() >= weight.rows() ? linalg::smallest_singular_value(weight) : 0.0;
  r.rhs_bound = r.sigma_min * (mu_a - mu_b).norm();
  r.holds = r.lhs_estimate >= r.rhs_bound - 3.0 * r.lhs_stderr;
  return r;
}

} // namespace gw::metrics
