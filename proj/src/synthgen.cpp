#include "gw/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace gw::synth {

namespace {

std::vector<std::vector<node_t>> class_members(const std::vector<int>& labels, int num_classes) {
  std::vector<std::vector<node_t>> members(num_classes);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] != kUnlabeled) {
      members[labels[v]].push_back(static_cast<node_t>(v));
    }
  }
  return members;
}

/// Index subsets (over the C-1 "other" classes) in component order.
std::vector<std::vector<int>> ordered_subsets(int others) {
  const int window = (others + 1) / 2;
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> seen;
  const int windows = window < others ? others : 1;
  for (int l = 0; l < windows; ++l) {
    std::vector<int> s;
    for (int t = 0; t < window; ++t) {
      s.push_back((l + t) % others);
    }
    std::sort(s.begin(), s.end());
    seen.insert(s);
    out.push_back(std::move(s));
  }
  std::vector<std::vector<int>> rest;
  for (unsigned mask = 1; mask < (1u << others); ++mask) {
    std::vector<int> s;
    for (int b = 0; b < others; ++b) {
      if (mask & (1u << b)) {
        s.push_back(b);
      }
    }
    if (!seen.contains(s)) {
      rest.push_back(std::move(s));
    }
  }
  std::sort(rest.begin(), rest.end(), [window](const auto& a, const auto& b) {
    const int da = std::abs(static_cast<int>(a.size()) - window);
    const int db = std::abs(static_cast<int>(b.size()) - window);
    if (da != db) {
      return da < db;
    }
    if (a.size() != b.size()) {
      return a.size() < b.size();
    }
    return a < b;
  });
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

} // namespace

Vector MixtureSpec::distribution(int y, int l) const {
  Vector p = Vector::Zero(num_classes);
  const auto& s = supports.at(y).at(l);
  for (int c : s) {
    p(c) = 1.0 / static_cast<double>(s.size());
  }
  return p;
}

int max_components(int num_classes) {
  if (num_classes < 2) {
    return 0;
  }
  if (num_classes - 1 >= 31) {
    return std::numeric_limits<int>::max();
  }
  return static_cast<int>((1u << (num_classes - 1)) - 1);
}

std::vector<std::vector<int>> component_supports(int num_classes, int y, int k) {
  if (num_classes < 2) {
    throw Error("mixture components need at least two classes");
  }
  if (k < 1) {
    throw Error("mixture components: k must be >= 1");
  }
  if (num_classes > 16) {
    // Only windows are enumerated for large C; there are C-1 of them.
    if (k > num_classes - 1) {
      throw Error("k exceeds the number of constructible distinct components");
    }
  } else if (k > max_components(num_classes)) {
    throw Error("k=" + std::to_string(k) + " exceeds the number of constructible distinct "
                "components (" + std::to_string(max_components(num_classes)) + ") for C=" +
                std::to_string(num_classes));
  }
  const int others = num_classes - 1;
  std::vector<std::vector<int>> subsets;
  if (num_classes > 16) {
    const int window = (others + 1) / 2;
    for (int l = 0; l < k; ++l) {
      std::vector<int> s;
      for (int t = 0; t < window; ++t) {
        s.push_back((l + t) % others);
      }
      subsets.push_back(std::move(s));
    }
  } else {
    subsets = ordered_subsets(others);
    subsets.resize(k);
  }
  std::vector<std::vector<int>> out;
  for (const auto& s : subsets) {
    std::vector<int> classes;
    for (int idx : s) {
      classes.push_back((y + 1 + idx) % num_classes);
    }
    std::sort(classes.begin(), classes.end());
    out.push_back(std::move(classes));
  }
  return out;
}

std::pair<Graph, MixtureSpec> mixture_rewire(const Graph& graph, int k, std::uint64_t seed) {
  if (!graph.has_labels()) {
    throw Error("mixture_rewire: graph has no labels");
  }
  const int C = graph.num_classes();
  if (k >= 2 && C < 3) {
    throw Error("mixture_rewire: k >= 2 needs at least 3 classes");
  }
  MixtureSpec spec;
  spec.k = k;
  spec.num_classes = C;
  for (int y = 0; y < C; ++y) {
    spec.supports.push_back(component_supports(C, y, k));
  }
  const auto& labels = graph.labels();
  const auto members = class_members(labels, C);

  Rng rng(seed);
  std::uniform_int_distribution<int> pick_comp(0, k - 1);
  spec.node_component.assign(graph.num_nodes(), -1);
  std::vector<Edge> edges;
  edges.reserve(graph.num_edges());
  std::vector<node_t> chosen;
  for (node_t v = 0; v < graph.num_nodes(); ++v) {
    const node_t deg = graph.out_degree(v);
    if (labels[v] == kUnlabeled) {
      for (node_t u : graph.neighbors(v)) {
        edges.push_back({v, u});
      }
      continue;
    }
    const int l = pick_comp(rng);
    spec.node_component[v] = l;
    const auto& support = spec.supports[labels[v]][l];
    std::size_t pool = 0;
    for (int c : support) {
      pool += members[c].size();
    }
    if (static_cast<std::size_t>(deg) > pool) {
      throw Error("mixture_rewire: node " + std::to_string(v) + " has out-degree " +
                  std::to_string(deg) + " but its component offers only " +
                  std::to_string(pool) + " distinct neighbors");
    }
    std::uniform_int_distribution<std::size_t> pick_class(0, support.size() - 1);
    chosen.clear();
    while (static_cast<node_t>(chosen.size()) < deg) {
      const int c = support[pick_class(rng)];
      if (members[c].empty()) {
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick_node(0, members[c].size() - 1);
      const node_t u = members[c][pick_node(rng)];
      if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) {
        chosen.push_back(u);
      }
    }
    for (node_t u : chosen) {
      edges.push_back({v, u});
    }
  }
  return {graph.with_edges(std::move(edges), /*directed=*/true), std::move(spec)};
}

Masks stratified_split(const std::vector<int>& labels, int num_classes, double train_frac,
                       double val_frac, std::uint64_t seed) {
  const double test_frac = 1.0 - train_frac - val_frac;
  const std::size_t n = labels.size();
  Masks m;
  m.train.assign(n, 0);
  m.val.assign(n, 0);
  m.test.assign(n, 0);
  Rng rng(seed);
  auto members = class_members(labels, num_classes);
  for (auto& group : members) {
    std::shuffle(group.begin(), group.end(), rng);
    const auto size = static_cast<double>(group.size());
    const auto n_test = static_cast<std::size_t>(std::floor(test_frac * size + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(val_frac * size + 1e-9));
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (i < n_test) {
        m.test[group[i]] = 1;
      } else if (i < n_test + n_val) {
        m.val[group[i]] = 1;
      } else {
        m.train[group[i]] = 1;
      }
    }
  }
  return m;
}

Graph gen_leafcount(const LeafcountOptions& opts) {
  if (opts.depth < 1 || opts.depth > 16) {
    throw Error("gen_leafcount: depth must be in [1, 16]");
  }
  const int trees = opts.trees > 0 ? opts.trees : (1 << opts.depth);
  const node_t size = leafcount_tree_size(opts.depth);
  const node_t first_leaf = (node_t{1} << opts.depth) - 1;
  const node_t n = size * trees;
  const int id_dims = opts.tree_id_scale > 0.0 ? trees : 0;
  const int num_classes = (1 << opts.depth) + 1;

  Matrix x = Matrix::Zero(n, 3 + id_dims);
  std::vector<int> labels(n, kUnlabeled);
  std::vector<Edge> edges;
  Rng rng(opts.seed);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < trees; ++t) {
    const node_t base = t * size;
    int ones = 0;
    for (node_t i = 0; i < size; ++i) {
      const node_t v = base + i;
      if (i > 0) {
        edges.push_back({v, base + (i - 1) / 2});
      }
      if (i >= first_leaf) {
        const int value = coin(rng) ? 1 : 0;
        ones += value;
        x(v, 0) = value;
        x(v, 1) = 1.0;
      }
      if (id_dims > 0) {
        x(v, 3 + t) = opts.tree_id_scale;
      }
    }
    x(base, 2) = 1.0;
    labels[base] = ones;
  }
  Graph g = Graph::from_edges(n, std::move(edges), std::move(x), /*directed=*/false)
                .with_labels(std::move(labels), num_classes);
  Masks masks = stratified_split(g.labels(), num_classes, opts.train_frac, opts.val_frac,
                                 derive_seed(opts.seed, 1));
  if (mask_indices(masks.train).empty() || mask_indices(masks.val).empty() ||
      mask_indices(masks.test).empty()) {
    throw Error("gen_leafcount: too few trees to populate train/val/test masks");
  }
  return g.with_masks(std::move(masks));
}

Graph gen_bottleneck(const BottleneckOptions& opts) {
  if (opts.pairs < 2) {
    throw Error("gen_bottleneck: pairs must be >= 2");
  }
  const int P = opts.pairs;
  const int C = opts.num_classes > 0 ? opts.num_classes : P;
  const node_t n = 2 * P + 2;
  const node_t hub_a = 2 * P;
  const node_t hub_b = 2 * P + 1;

  Rng rng(opts.seed);
  std::uniform_int_distribution<int> pick_payload(0, C - 1);
  Matrix x = Matrix::Zero(n, P + C);
  std::vector<int> labels(n, kUnlabeled);
  std::vector<Edge> edges;
  for (int i = 0; i < P; ++i) {
    const int payload = pick_payload(rng);
    x(i, i) = 1.0;
    x(i, P + payload) = 1.0;
    x(P + i, i) = 1.0;
    labels[P + i] = payload;
    edges.push_back({i, hub_a});
    edges.push_back({P + i, hub_b});
  }
  edges.push_back({hub_a, hub_b});

  std::vector<node_t> side_b(P);
  std::iota(side_b.begin(), side_b.end(), P);
  std::shuffle(side_b.begin(), side_b.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(0.6 * P));
  const auto n_val = static_cast<std::size_t>(std::lround(0.2 * P));
  Masks m;
  m.train.assign(n, 0);
  m.val.assign(n, 0);
  m.test.assign(n, 0);
  for (std::size_t k = 0; k < side_b.size(); ++k) {
    auto& mask = k < n_train ? m.train : (k < n_train + n_val ? m.val : m.test);
    mask[side_b[k]] = 1;
  }
  return Graph::from_edges(n, std::move(edges), std::move(x), /*directed=*/false)
      .with_labels(std::move(labels), C)
      .with_masks(std::move(m));
}

Graph inject_edge_noise(const Graph& graph, std::int64_t k, std::uint64_t seed) {
  if (!graph.has_labels() || !graph.has_masks()) {
    throw Error("inject_edge_noise: graph needs labels and masks");
  }
  const auto test = mask_indices(graph.masks().test);
  if (test.empty()) {
    throw Error("inject_edge_noise: empty test mask");
  }
  if (k <= 0) {
    return graph;
  }
  const int C = graph.num_classes();
  const auto members = class_members(graph.labels(), C);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_test(0, test.size() - 1);
  std::uniform_int_distribution<int> pick_class(0, C - 1);
  std::vector<Edge> edges = graph.edge_list();
  for (std::int64_t a = 0; a < k; ++a) {
    const node_t v = test[pick_test(rng)];
    const int c = pick_class(rng);
    if (members[c].empty()) {
      continue;
    }
    const node_t u =
        members[c][std::uniform_int_distribution<std::size_t>(0, members[c].size() - 1)(rng)];
    edges.push_back({v, u});
  }
  return graph.with_edges(std::move(edges), graph.directed());
}

Graph gen_sbm(const SbmOptions& opts) {
  if (opts.n < opts.num_classes || opts.num_classes < 2) {
    throw Error("gen_sbm: need n >= C >= 2");
  }
  Rng rng(opts.seed);
  const node_t n = opts.n;
  const int C = opts.num_classes;
  std::vector<int> labels(n);
  for (node_t v = 0; v < n; ++v) {
    labels[v] = v % C;
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  const auto members = class_members(labels, C);

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centres(C, opts.feature_dim);
  for (Eigen::Index i = 0; i < centres.size(); ++i) {
    centres.data()[i] = opts.class_separation * normal(rng);
  }
  Matrix x(n, opts.feature_dim);
  for (node_t v = 0; v < n; ++v) {
    for (int d = 0; d < opts.feature_dim; ++d) {
      x(v, d) = centres(labels[v], d) + opts.feature_noise * normal(rng);
    }
  }

  // Directed draws: avg out-degree target for directed graphs, half of it
  // (before symmetrization) for undirected ones.
  const auto target = static_cast<std::int64_t>(
      std::llround(opts.avg_degree * n / (opts.undirected ? 2.0 : 1.0)));
  std::set<std::pair<node_t, node_t>> seen;
  std::vector<Edge> edges;
  std::uniform_int_distribution<node_t> pick_node(0, n - 1);
  std::uniform_int_distribution<int> pick_other(1, C - 1);
  std::bernoulli_distribution same(opts.homophily);
  std::int64_t guard = 0;
  while (static_cast<std::int64_t>(edges.size()) < target && guard++ < 100 * target + 1000) {
    const node_t u = pick_node(rng);
    const int c = same(rng) ? labels[u] : (labels[u] + pick_other(rng)) % C;
    const auto& pool = members[c];
    const node_t v = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    if (u == v) {
      continue;
    }
    const std::pair<node_t, node_t> key =
        opts.undirected ? std::pair<node_t, node_t>{std::min(u, v), std::max(u, v)}
                        : std::pair<node_t, node_t>{u, v};
    if (!seen.insert(key).second) {
      continue;
    }
    edges.push_back({u, v});
  }
  Graph g = Graph::from_edges(n, std::move(edges), std::move(x), !opts.undirected)
                .with_labels(std::move(labels), C);
  return g.with_masks(random_class_split(g.labels(), C, opts.train_per_class,
                                         opts.val_per_class, derive_seed(opts.seed, 7)));
}

} // namespace gw::synth
