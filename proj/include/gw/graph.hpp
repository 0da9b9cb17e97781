#pragma once

#include "gw/common.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace gw {

/// Label value for nodes that carry no class (hubs, internal tree nodes, ...).
inline constexpr int kUnlabeled = -1;

struct Edge {
  node_t src = 0;
  node_t dst = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Boolean node masks stored as bytes. Empty vectors mean "no split".
struct Masks {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> val;
  std::vector<std::uint8_t> test;

  bool empty() const { return train.empty() && val.empty() && test.empty(); }
  bool operator==(const Masks&) const = default;
};

std::vector<node_t> mask_indices(std::span<const std::uint8_t> mask);

/// CSR graph with dense node features, optional labels and split masks.
///
/// Rows hold out-neighbors sorted ascending without duplicates or self-loops.
/// Undirected graphs are stored as their explicit symmetric closure. Values are
/// immutable once built; the `with_*` helpers return modified copies.
class Graph {
public:
  Graph() = default;

  /// Sorts and deduplicates `edges`, drops self-loops, and bounds-checks every
  /// endpoint. When `directed` is false the symmetric closure is stored.
  static Graph from_edges(node_t n, std::vector<Edge> edges, Matrix features,
                          bool directed);

  Graph with_labels(std::vector<int> labels, int num_classes) const;
  Graph with_masks(Masks masks) const;
  Graph with_edges(std::vector<Edge> edges, bool directed) const;
  Graph with_features(Matrix features) const;

  node_t num_nodes() const noexcept { return n_; }
  edge_t num_edges() const noexcept { return static_cast<edge_t>(col_idx_.size()); }
  int feature_dim() const noexcept { return static_cast<int>(features_.cols()); }
  int num_classes() const noexcept { return num_classes_; }
  bool directed() const noexcept { return directed_; }

  const std::vector<edge_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<node_t>& col_idx() const noexcept { return col_idx_; }
  std::span<const node_t> neighbors(node_t v) const {
    return {col_idx_.data() + row_ptr_[v],
            static_cast<std::size_t>(row_ptr_[v + 1] - row_ptr_[v])};
  }
  node_t out_degree(node_t v) const {
    return static_cast<node_t>(row_ptr_[v + 1] - row_ptr_[v]);
  }
  bool has_edge(node_t src, node_t dst) const;
  std::vector<Edge> edge_list() const;

  const Matrix& features() const noexcept { return features_; }

  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  bool has_masks() const noexcept { return !masks_.empty(); }
  const Masks& masks() const noexcept { return masks_; }

  /// Throws gw::Error describing the first violated invariant.
  void validate() const;

  bool operator==(const Graph& other) const;

private:
  node_t n_ = 0;
  int num_classes_ = 0;
  bool directed_ = true;
  std::vector<edge_t> row_ptr_{0};
  std::vector<node_t> col_idx_;
  Matrix features_;
  std::vector<int> labels_;
  Masks masks_;
};

/// Union of the edge set and its reverse.
Graph to_undirected(const Graph& graph);

struct DegreeStats {
  node_t min = 0;
  double avg = 0.0;
  node_t max = 0;
};

/// Out-degree statistics; avg is m / n.
DegreeStats degree_stats(const Graph& graph);

/// Planetoid-style split: `train_per_class` / `val_per_class` labeled nodes per
/// class drawn at random, every remaining labeled node goes to test.
Masks random_class_split(const std::vector<int>& labels, int num_classes,
                         int train_per_class, int val_per_class,
                         std::uint64_t seed);

} // namespace gw
