#include "gw/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace gw {

std::vector<node_t> mask_indices(std::span<const std::uint8_t> mask) {
  std::vector<node_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      out.push_back(static_cast<node_t>(i));
    }
  }
  return out;
}

Graph Graph::from_edges(node_t n, std::vector<Edge> edges, Matrix features,
                        bool directed) {
  if (n < 1) {
    throw Error("graph must have at least one node");
  }
  if (features.rows() != n) {
    throw Error("feature row count " + std::to_string(features.rows()) +
                " does not match node count " + std::to_string(n));
  }
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw Error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                  "): index out of range for n=" + std::to_string(n));
    }
  }
  if (!directed) {
    const std::size_t m = edges.size();
    edges.reserve(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      edges.push_back({edges[i].dst, edges[i].src});
    }
  }
  std::erase_if(edges, [](const Edge& e) { return e.src == e.dst; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.n_ = n;
  g.directed_ = directed;
  g.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  g.col_idx_.reserve(edges.size());
  for (const Edge& e : edges) {
    ++g.row_ptr_[e.src + 1];
    g.col_idx_.push_back(e.dst);
  }
  std::partial_sum(g.row_ptr_.begin(), g.row_ptr_.end(), g.row_ptr_.begin());
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_labels(std::vector<int> labels, int num_classes) const {
  if (static_cast<node_t>(labels.size()) != n_) {
    throw Error("label count does not match node count");
  }
  for (int y : labels) {
    if (y != kUnlabeled && (y < 0 || y >= num_classes)) {
      throw Error("label " + std::to_string(y) + " outside [0, " +
                  std::to_string(num_classes) + ")");
    }
  }
  Graph g = *this;
  g.labels_ = std::move(labels);
  g.num_classes_ = num_classes;
  if (g.has_masks()) {
    g.validate();
  }
  return g;
}

Graph Graph::with_masks(Masks masks) const {
  Graph g = *this;
  g.masks_ = std::move(masks);
  g.validate();
  return g;
}

Graph Graph::with_edges(std::vector<Edge> edges, bool directed) const {
  Graph g = from_edges(n_, std::move(edges), features_, directed);
  g.labels_ = labels_;
  g.num_classes_ = num_classes_;
  g.masks_ = masks_;
  return g;
}

Graph Graph::with_features(Matrix features) const {
  if (features.rows() != n_) {
    throw Error("feature row count does not match node count");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

bool Graph::has_edge(node_t src, node_t dst) const {
  const auto row = neighbors(src);
  return std::binary_search(row.begin(), row.end(), dst);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(col_idx_.size());
  for (node_t v = 0; v < n_; ++v) {
    for (node_t u : neighbors(v)) {
      out.push_back({v, u});
    }
  }
  return out;
}

void Graph::validate() const {
  if (n_ < 1) {
    throw Error("graph must have at least one node");
  }
  if (row_ptr_.size() != static_cast<std::size_t>(n_) + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != static_cast<edge_t>(col_idx_.size())) {
    throw Error("row_ptr has wrong shape or endpoints");
  }
  for (node_t v = 0; v < n_; ++v) {
    if (row_ptr_[v + 1] < row_ptr_[v]) {
      throw Error("row_ptr is not nondecreasing");
    }
    const auto row = neighbors(v);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] < 0 || row[k] >= n_) {
        throw Error("column index out of range");
      }
      if (k > 0 && row[k] <= row[k - 1]) {
        throw Error("row " + std::to_string(v) + " is not strictly increasing");
      }
      if (row[k] == v) {
        throw Error("self-loop stored at node " + std::to_string(v));
      }
    }
  }
  if (!directed_) {
    for (node_t v = 0; v < n_; ++v) {
      for (node_t u : neighbors(v)) {
        if (!has_edge(u, v)) {
          throw Error("undirected graph is missing reverse edge");
        }
      }
    }
  }
  if (features_.rows() != n_) {
    throw Error("feature row count does not match node count");
  }
  if (!labels_.empty()) {
    if (static_cast<node_t>(labels_.size()) != n_) {
      throw Error("label count does not match node count");
    }
    for (int y : labels_) {
      if (y != kUnlabeled && (y < 0 || y >= num_classes_)) {
        throw Error("label outside [0, C)");
      }
    }
  }
  if (!masks_.empty()) {
    const auto n = static_cast<std::size_t>(n_);
    if (masks_.train.size() != n || masks_.val.size() != n || masks_.test.size() != n) {
      throw Error("mask length does not match node count");
    }
    for (std::size_t v = 0; v < n; ++v) {
      const int hits = masks_.train[v] + masks_.val[v] + masks_.test[v];
      if (hits > 1) {
        throw Error("masks are not disjoint at node " + std::to_string(v));
      }
      if (hits == 1 && (labels_.empty() || labels_[v] == kUnlabeled)) {
        throw Error("masked node " + std::to_string(v) + " has no label");
      }
    }
  }
}

bool Graph::operator==(const Graph& other) const {
  return n_ == other.n_ && num_classes_ == other.num_classes_ &&
         directed_ == other.directed_ && row_ptr_ == other.row_ptr_ &&
         col_idx_ == other.col_idx_ && features_.rows() == other.features_.rows() &&
         features_.cols() == other.features_.cols() && features_ == other.features_ &&
         labels_ == other.labels_ && masks_ == other.masks_;
}

Graph to_undirected(const Graph& graph) {
  if (!graph.directed()) {
    return graph;
  }
  return graph.with_edges(graph.edge_list(), /*directed=*/false);
}

DegreeStats degree_stats(const Graph& graph) {
  DegreeStats s;
  const node_t n = graph.num_nodes();
  s.min = graph.out_degree(0);
  s.max = s.min;
  for (node_t v = 1; v < n; ++v) {
    s.min = std::min(s.min, graph.out_degree(v));
    s.max = std::max(s.max, graph.out_degree(v));
  }
  s.avg = static_cast<double>(graph.num_edges()) / n;
  return s;
}

Masks random_class_split(const std::vector<int>& labels, int num_classes,
                         int train_per_class, int val_per_class,
                         std::uint64_t seed) {
  const std::size_t n = labels.size();
  Masks m;
  m.train.assign(n, 0);
  m.val.assign(n, 0);
  m.test.assign(n, 0);
  Rng rng(seed);
  for (int c = 0; c < num_classes; ++c) {
    std::vector<node_t> members;
    for (std::size_t v = 0; v < n; ++v) {
      if (labels[v] == c) {
        members.push_back(static_cast<node_t>(v));
      }
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k < static_cast<std::size_t>(train_per_class)) {
        m.train[members[k]] = 1;
      } else if (k < static_cast<std::size_t>(train_per_class + val_per_class)) {
        m.val[members[k]] = 1;
      } else {
        m.test[members[k]] = 1;
      }
    }
  }
  return m;
}

} // namespace gw
