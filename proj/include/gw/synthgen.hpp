#pragma once

#include "gw/graph.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace gw::synth {

/// Neighborhood mixture used by mixture_rewire.
struct MixtureSpec {
  int k = 1;
  int num_classes = 0;
  /// supports[y][l]: classes that component l of class y draws from uniformly.
  std::vector<std::vector<std::vector<int>>> supports;
  /// Component id of every node (-1 for unlabeled nodes).
  std::vector<int> node_component;

  /// Dense class distribution D_{p_l} of component l of class y.
  Vector distribution(int y, int l) const;
};

/// Supports of the first k heterophilic components of class y.
///
/// The first C-1 components are the cyclic windows of ceil((C-1)/2) classes
/// starting at offset l from y+1 (y itself excluded). Larger k continues with
/// the remaining nonempty subsets of the other classes, ordered by distance of
/// their size from the window size, then size, then lexicographically.
std::vector<std::vector<int>> component_supports(int num_classes, int y, int k);

/// Maximum k accepted by mixture_rewire for `num_classes` classes.
int max_components(int num_classes);

/// Replaces every labeled node's out-edges by `out_degree(v)` fresh edges:
/// component l ~ U{0..k-1}, class c ~ D_{p_l}, neighbor uniform from V_c,
/// without repeats. The result is directed; nodes, features, labels, masks and
/// out-degrees are preserved. Unlabeled nodes keep their original edges.
std::pair<Graph, MixtureSpec> mixture_rewire(const Graph& graph, int k, std::uint64_t seed);

struct LeafcountOptions {
  int depth = 3;
  /// Number of trees; 0 means 2^depth.
  int trees = 0;
  std::uint64_t seed = 0;
  /// Appends scale * one-hot(tree id) so that feature similarity identifies
  /// nodes of the same tree. 0 disables the channel.
  double tree_id_scale = 1.5;
  double train_frac = 0.6;
  double val_frac = 0.2;
};

/// Disjoint complete binary trees of the given depth. Node features are
/// [leaf value, is_leaf, is_root] (+ optional tree-id channel); only roots are
/// labeled, with the number of 1-valued leaves below them.
Graph gen_leafcount(const LeafcountOptions& opts);

/// Node ids inside one leafcount tree are heap-ordered: root 0, children of i
/// at 2i+1 and 2i+2. Tree t occupies ids [t * size, (t + 1) * size).
inline node_t leafcount_tree_size(int depth) { return (node_t{2} << depth) - 1; }

struct BottleneckOptions {
  int pairs = 32;
  /// Payload classes; 0 means `pairs`.
  int num_classes = 0;
  std::uint64_t seed = 0;
};

/// Two sides of `pairs` nodes joined by hubs and a single bridge edge.
/// Layout: A_i = i, B_i = pairs + i, hub A = 2*pairs, hub B = 2*pairs + 1.
/// A_i carries one-hot(i) and one-hot(payload_i); B_i carries one-hot(i) and
/// is labeled payload_i. Only B nodes are labeled and split 60/20/20.
Graph gen_bottleneck(const BottleneckOptions& opts);

/// k attempts of: test node v, class c ~ U(classes), u ~ U(V_c), add (v, u)
/// (and (u, v) for undirected graphs). Duplicates collapse.
Graph inject_edge_noise(const Graph& graph, std::int64_t k, std::uint64_t seed);

struct SbmOptions {
  node_t n = 1000;
  int num_classes = 5;
  double avg_degree = 6.0;
  /// Probability that an edge endpoint is drawn from the same class.
  double homophily = 0.8;
  int feature_dim = 16;
  /// Distance scale of the class means relative to unit feature noise.
  double class_separation = 1.0;
  double feature_noise = 1.0;
  bool undirected = true;
  std::uint64_t seed = 0;
  int train_per_class = 20;
  int val_per_class = 30;
};

/// Planted-partition graph with Gaussian class-conditional features; the
/// shared fixture for the rewiring experiments.
Graph gen_sbm(const SbmOptions& opts);

/// Per class: floor(test_frac * n_c) test, floor(val_frac * n_c) val, the
/// rest train, so tiny classes land entirely in train.
Masks stratified_split(const std::vector<int>& labels, int num_classes, double train_frac,
                       double val_frac, std::uint64_t seed);

} // namespace gw::synth
