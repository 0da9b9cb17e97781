#include "doctest.h"

#include "gw/linalg.hpp"
#include "gw/metrics.hpp"
#include "gw/synthgen.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <map>

using namespace gw;
using gw::testing::edge_graph;

namespace {

Graph labeled(node_t n, std::vector<Edge> edges, std::vector<int> y, int C, bool directed = false) {
  return edge_graph(n, std::move(edges), directed).with_labels(std::move(y), C);
}

/// Degree-based oracle: p(c) from symmetrized degrees over 2|E|, pair mass from
/// an explicit undirected edge map.
struct Oracle {
  double h_adj = 0.0;
  double li = 0.0;
};

Oracle degree_oracle(const Graph& g) {
  const auto& y = g.labels();
  const int C = g.num_classes();
  std::map<std::pair<node_t, node_t>, int> undirected;
  for (const Edge& e : g.edge_list()) {
    if (y[e.src] != kUnlabeled && y[e.dst] != kUnlabeled) {
      undirected[{std::min(e.src, e.dst), std::max(e.src, e.dst)}] = 1;
    }
  }
  const double m = static_cast<double>(undirected.size());
  std::vector<double> deg_mass(C, 0.0);
  std::vector<std::vector<double>> pair(C, std::vector<double>(C, 0.0));
  double same = 0.0;
  for (const auto& [uv, unused] : undirected) {
    const int a = y[uv.first];
    const int b = y[uv.second];
    deg_mass[a] += 1.0;
    deg_mass[b] += 1.0;
    pair[a][b] += 0.5 / m;
    pair[b][a] += 0.5 / m;
    same += a == b;
  }
  double sq = 0.0;
  double h = 0.0;
  double mi = 0.0;
  for (int c = 0; c < C; ++c) {
    const double p = deg_mass[c] / (2.0 * m);
    sq += p * p;
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  for (int a = 0; a < C; ++a) {
    for (int b = 0; b < C; ++b) {
      if (pair[a][b] > 0.0) {
        mi += pair[a][b] *
              std::log(pair[a][b] / ((deg_mass[a] / (2.0 * m)) * (deg_mass[b] / (2.0 * m))));
      }
    }
  }
  return {(same / m - sq) / (1.0 - sq), mi / h};
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("edge homophily examples") {
  CHECK(metrics::edge_homophily(labeled(2, {{0, 1}}, {1, 1}, 2)) == 1.0);
  const Graph bip = labeled(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, {0, 0, 1, 1}, 2);
  CHECK(metrics::edge_homophily(bip) == 0.0);
  CHECK_THROWS_AS(metrics::edge_homophily(labeled(3, {}, {0, 1, 0}, 2)), Error);
  CHECK_THROWS_AS(metrics::edge_homophily(edge_graph(2, {{0, 1}}, true)), Error);
}

TEST_CASE("edge homophily respects stored direction") {
  // 0->1 same class, 2->1 and 2->0 cross class, no reverse edges.
  const Graph g = labeled(3, {{0, 1}, {2, 1}, {2, 0}}, {0, 0, 1}, 2, true);
  CHECK(metrics::edge_homophily(g) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("zero mutual information fixture") {
  // Each node has one same-class and one other-class neighbor; p(a,b) = 1/4 = p(a) p(b).
  const Graph g = labeled(4, {{0, 1}, {2, 3}, {0, 2}, {1, 3}}, {0, 0, 1, 1}, 2);
  CHECK(metrics::label_informativeness(g) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(metrics::adjusted_homophily(g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perfect homophily gives LI = h_adj = 1") {
  const Graph g = labeled(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {3, 5}}, {0, 0, 0, 1, 1, 1}, 2);
  CHECK(metrics::label_informativeness(g) == doctest::Approx(1.0));
  CHECK(metrics::adjusted_homophily(g) == doctest::Approx(1.0));
}

TEST_CASE("LI is 1 whenever the neighbor label is a function of the node label") {
  // Class 0 only links to class 1 and class 1 only to class 0.
  const Graph g = labeled(4, {{0, 2}, {0, 3}, {1, 3}}, {0, 0, 1, 1}, 2);
  CHECK(metrics::label_informativeness(g) == doctest::Approx(1.0));
}

TEST_CASE("single effective class is an explicit error") {
  const Graph g = labeled(3, {{0, 1}, {1, 2}}, {0, 0, 0}, 2);
  CHECK_THROWS_AS(metrics::adjusted_homophily(g), Error);
  CHECK_THROWS_AS(metrics::label_informativeness(g), Error);
}

TEST_CASE("h_adj and LI match a degree-based oracle on random graphs") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Graph g = gw::testing::random_graph(8 + static_cast<node_t>(seed % 20), 0.2, 3, seed,
                                              seed % 2 == 0);
    Oracle o;
    try {
      o = degree_oracle(g);
    } catch (...) {
      continue;
    }
    if (!std::isfinite(o.h_adj) || !std::isfinite(o.li)) {
      continue;
    }
    CHECK(std::abs(metrics::adjusted_homophily(g) - o.h_adj) < 1e-10);
    CHECK(std::abs(metrics::label_informativeness(g) - o.li) < 1e-10);
    CHECK(metrics::label_informativeness(g) <= 1.0 + 1e-12);
    const double h = metrics::edge_homophily(g);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
  }
}

TEST_CASE("h_adj is invariant under class relabeling") {
  const Graph g = gw::testing::random_graph(40, 0.1, 4, 3, false);
  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<int> y = g.labels();
  for (int& v : y) {
    v = perm[v];
  }
  const Graph p = g.with_labels(y, 4);
  CHECK(metrics::adjusted_homophily(p) == doctest::Approx(metrics::adjusted_homophily(g)).epsilon(1e-12));
  CHECK(metrics::label_informativeness(p) ==
        doctest::Approx(metrics::label_informativeness(g)).epsilon(1e-12));
}

TEST_CASE("neighborhood distribution examples") {
  const Graph g = labeled(6, {{0, 1}, {0, 2}, {0, 3}, {4, 5}}, {0, 0, 0, 1, 2, 2}, 3, true);
  const auto d = metrics::neighborhood_distributions(g, g.labels(), 3);
  CHECK(d[0].probs(0) == doctest::Approx(2.0 / 3.0));
  CHECK(d[0].probs(1) == doctest::Approx(1.0 / 3.0));
  CHECK(d[0].probs(2) == 0.0);
  CHECK(d[4].probs(2) == 1.0);
  CHECK(d[1].uniform_fallback);
  CHECK(d[1].probs.isApproxToConstant(1.0 / 3.0));

  const Graph iso = labeled(1, {}, {3}, 4);
  const auto di = metrics::neighborhood_distributions(iso, iso.labels(), 4);
  CHECK(di[0].uniform_fallback);
  CHECK(di[0].probs.isApproxToConstant(0.25));
  for (const auto& nd : d) {
    CHECK(std::abs(nd.probs.sum() - 1.0) < 1e-12);
    CHECK(nd.probs.minCoeff() >= 0.0);
  }
}

TEST_CASE("class neighborhood std examples") {
  // Class 0 nodes 0,1 each see one class-1 neighbor: identical distributions.
  const Graph same = labeled(4, {{0, 2}, {1, 3}}, {0, 0, 1, 1}, 2);
  CHECK(metrics::class_neighborhood_std(same).per_class[0] == 0.0);

  // Class 0 nodes see [1,0] and [0,1]: std 0.5 in both coordinates.
  const Graph split = labeled(4, {{0, 2}, {1, 3}}, {0, 0, 0, 1}, 2, true);
  const auto s = metrics::class_neighborhood_std(split);
  CHECK(s.per_class[0] == doctest::Approx(0.5));
  // Class 1 has no node with neighbors.
  CHECK(s.empty_classes == std::vector<int>{1});
  CHECK(s.average == doctest::Approx(0.5));
}

TEST_CASE("compute_report turns failures into warnings") {
  const auto r = metrics::compute_report(labeled(3, {{0, 1}, {1, 2}}, {0, 0, 0}, 2));
  CHECK(r.h_edge.has_value());
  CHECK_FALSE(r.h_adj.has_value());
  CHECK_FALSE(r.li.has_value());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("smallest singular value matches a symmetric eigensolver") {
  Rng rng(5);
  for (int t = 0; t < 60; ++t) {
    const int rows = std::uniform_int_distribution<int>(1, 16)(rng);
    const int cols = std::uniform_int_distribution<int>(1, 16)(rng);
    const Matrix a = gw::testing::random_features(rows, cols, rng);
    const Matrix gram = rows >= cols ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double expected = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
    CHECK(std::abs(linalg::smallest_singular_value(a) - expected) < 1e-8);
    const Vector sv = linalg::singular_values(a);
    CHECK(sv.size() == std::min(rows, cols));
    for (Eigen::Index i = 1; i < sv.size(); ++i) {
      CHECK(sv(i - 1) >= sv(i));
    }
  }
  // Rank-deficient input.
  Matrix r(3, 3);
  r << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  CHECK(linalg::smallest_singular_value(r) < 1e-8);
}

TEST_CASE("mean_aggregate averages out-neighbors and zeroes isolated nodes") {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const Graph g = Graph::from_edges(3, {{0, 1}, {0, 2}}, x, true);
  const Matrix a = metrics::mean_aggregate(g, x);
  CHECK(a(0, 0) == 4.0);
  CHECK(a(0, 1) == 5.0);
  CHECK(a.row(1).isZero());
}

TEST_CASE("mixture gap examples") {
  auto [g, spec] = synth::mixture_rewire(gw::synth::gen_sbm({.n = 400, .seed = 2}), 2, 4);
  std::vector<node_t> a;
  std::vector<node_t> b;
  for (node_t v = 0; v < g.num_nodes(); ++v) {
    if (g.labels()[v] == 0 && g.out_degree(v) > 0) {
      (spec.node_component[v] == 0 ? a : b).push_back(v);
    }
  }
  REQUIRE_FALSE(a.empty());
  REQUIRE_FALSE(b.empty());
  const Matrix eye = Matrix::Identity(g.feature_dim(), g.feature_dim());

  const auto same = metrics::theorem1_gap(g, eye, a, a, 1000, 1);
  CHECK(same.rhs_bound == doctest::Approx(0.0));
  CHECK(same.holds);

  const auto r = metrics::theorem1_gap(g, eye, a, b, 10000, 2);
  CHECK(r.sigma_min == doctest::Approx(1.0));
  const Matrix agg = metrics::mean_aggregate(g, g.features());
  Vector mu_a = Vector::Zero(g.feature_dim());
  Vector mu_b = Vector::Zero(g.feature_dim());
  for (node_t v : a) {
    mu_a += agg.row(v).transpose() / static_cast<double>(a.size());
  }
  for (node_t v : b) {
    mu_b += agg.row(v).transpose() / static_cast<double>(b.size());
  }
  CHECK(r.rhs_bound == doctest::Approx((mu_a - mu_b).norm()).epsilon(1e-10));
  CHECK(r.holds);

  // Exact means: each class contributes its class-mean feature vector.
  Matrix class_mean = Matrix::Zero(g.num_classes(), g.feature_dim());
  std::vector<double> count(g.num_classes(), 0.0);
  for (node_t v = 0; v < g.num_nodes(); ++v) {
    class_mean.row(g.labels()[v]) += g.features().row(v);
    count[g.labels()[v]] += 1.0;
  }
  for (int c = 0; c < g.num_classes(); ++c) {
    class_mean.row(c) /= count[c];
  }
  const Vector ea = (spec.distribution(0, 0).transpose() * class_mean).transpose();
  const Vector eb = (spec.distribution(0, 1).transpose() * class_mean).transpose();
  CHECK(metrics::theorem1_gap(g, eye, a, b, 10000, 3, std::pair{ea, eb}).holds);

  CHECK_THROWS_AS(metrics::theorem1_gap(g, eye, {}, b, 10, 1), Error);
}

} // TEST_SUITE
