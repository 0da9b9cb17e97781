#include "doctest.h"

#include "gw/bundle.hpp"
#include "gw/graph.hpp"
#include "test_util.hpp"

#include <fstream>
#include <set>

using namespace gw;
using gw::testing::edge_graph;
using gw::testing::random_graph;
using gw::testing::temp_dir;
using gw::testing::write_file;

namespace {

void write_csv_bundle(const std::filesystem::path& dir, int n, const std::string& edges,
                      bool directed = true) {
  write_file(dir / "meta.json",
             "{\"n\": " + std::to_string(n) + ", \"d\": 1, \"num_classes\": 0, \"directed_flag\": " +
                 (directed ? "true" : "false") + ", \"feature_encoding\": \"csv\"}");
  std::string feats;
  for (int i = 0; i < n; ++i) {
    feats += std::to_string(i) + "\n";
  }
  write_file(dir / "features.csv", feats);
  write_file(dir / "edges.csv", "src,dst\n" + edges);
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("single edge bundle builds the expected CSR") {
  const auto dir = temp_dir("single_edge");
  write_csv_bundle(dir, 2, "0,1\n");
  const Graph g = load_bundle(dir);
  CHECK(g.num_edges() == 1);
  CHECK(g.row_ptr() == std::vector<edge_t>{0, 1, 1});
  CHECK(g.col_idx() == std::vector<node_t>{1});
}

TEST_CASE("duplicate edges collapse on load") {
  const auto dir = temp_dir("dup_edge");
  write_csv_bundle(dir, 2, "0,1\n0,1\n");
  CHECK(load_bundle(dir).num_edges() == 1);
}

TEST_CASE("load errors name the violated contract") {
  const auto dir = temp_dir("bad_bundle");
  write_csv_bundle(dir, 3, "0,5\n");
  CHECK(error_of([&] { load_bundle(dir); }).find("index out of range") != std::string::npos);

  write_csv_bundle(dir, 3, "0,1\n");
  write_file(dir / "features.csv", "1\n2\n");
  CHECK(error_of([&] { load_bundle(dir); }).find("feature row count") != std::string::npos);

  write_csv_bundle(dir, 3, "0,1\n");
  write_file(dir / "labels.csv", "0\n1\n7\n");
  CHECK(error_of([&] { load_bundle(dir); }).find("label") != std::string::npos);

  std::filesystem::remove(dir / "edges.csv");
  CHECK(error_of([&] { load_bundle(dir); }).find("missing file") != std::string::npos);
}

TEST_CASE("binary round trip is exact") {
  const Graph g = random_graph(50, 0.1, 3, 7);
  const auto dir = temp_dir("roundtrip_bin");
  save_bundle(g, dir);
  const Graph back = load_bundle(dir);
  CHECK(back == g);
  CHECK(back.edge_list() == g.edge_list());
  CHECK(back.masks() == g.masks());
  for (Eigen::Index i = 0; i < g.features().size(); ++i) {
    REQUIRE(back.features().data()[i] == g.features().data()[i]);
  }
}

TEST_CASE("csv round trip within 1e-12") {
  const Graph g = random_graph(50, 0.1, 3, 8, false);
  const auto dir = temp_dir("roundtrip_csv");
  save_bundle(g, dir, FeatureEncoding::kCsv);
  const Graph back = load_bundle(dir);
  CHECK(back.edge_list() == g.edge_list());
  CHECK(back.labels() == g.labels());
  CHECK((back.features() - g.features()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("missing splits yield a per-class random split") {
  Graph g = random_graph(300, 0.02, 3, 9);
  const auto dir = temp_dir("nosplit");
  save_bundle(g, dir);
  std::filesystem::remove(dir / "splits.json");
  const Graph back = load_bundle(dir);
  std::vector<int> train(3, 0);
  std::vector<int> val(3, 0);
  for (node_t v = 0; v < back.num_nodes(); ++v) {
    const int c = back.labels()[v];
    train[c] += back.masks().train[v];
    val[c] += back.masks().val[v];
    CHECK(back.masks().train[v] + back.masks().val[v] + back.masks().test[v] == 1);
  }
  CHECK(train == std::vector<int>{20, 20, 20});
  CHECK(val == std::vector<int>{30, 30, 30});
}

TEST_CASE("from_edges sorts, deduplicates and drops self loops") {
  const Graph g = edge_graph(4, {{2, 1}, {2, 0}, {2, 1}, {3, 3}, {0, 3}}, true);
  CHECK(g.edge_list() == std::vector<Edge>{{0, 3}, {2, 0}, {2, 1}});
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS(edge_graph(2, {{0, 2}}, true), Error);
}

TEST_CASE("to_undirected examples") {
  CHECK(to_undirected(edge_graph(2, {{0, 1}}, true)).edge_list() == std::vector<Edge>{{0, 1}, {1, 0}});
  const Graph star = to_undirected(edge_graph(4, {{1, 0}, {2, 0}, {3, 0}}, true));
  CHECK(star.num_edges() == 6);
  CHECK_FALSE(star.directed());
}

TEST_CASE("to_undirected is idempotent, symmetric and never lowers a degree") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = random_graph(30, 0.08, 2, seed);
    const Graph u = to_undirected(g);
    CHECK(to_undirected(u) == u);
    CHECK_NOTHROW(u.validate());
    for (node_t v = 0; v < g.num_nodes(); ++v) {
      CHECK(u.out_degree(v) >= g.out_degree(v));
      for (node_t w : u.neighbors(v)) {
        CHECK(u.has_edge(w, v));
      }
    }
  }
}

TEST_CASE("degree_stats examples") {
  const auto path = degree_stats(edge_graph(3, {{0, 1}, {1, 2}}, false));
  CHECK(path.min == 1);
  CHECK(path.max == 2);
  CHECK(path.avg == doctest::Approx(4.0 / 3.0));

  const auto empty = degree_stats(edge_graph(3, {}, true));
  CHECK(empty.min == 0);
  CHECK(empty.max == 0);
  CHECK(empty.avg == 0.0);

  std::vector<Edge> k4;
  for (node_t a = 0; a < 4; ++a) {
    for (node_t b = a + 1; b < 4; ++b) {
      k4.push_back({a, b});
    }
  }
  const auto complete = degree_stats(edge_graph(4, k4, false));
  CHECK(complete.min == 3);
  CHECK(complete.max == 3);
  CHECK(complete.avg == 3.0);
}

TEST_CASE("validate rejects overlapping masks and unlabeled masked nodes") {
  const Graph g = random_graph(6, 0.3, 2, 1);
  Masks m = g.masks();
  m.val[static_cast<std::size_t>(mask_indices(m.train).front())] = 1;
  CHECK_THROWS_AS(g.with_masks(m), Error);

  std::vector<int> labels = g.labels();
  labels[0] = kUnlabeled;
  CHECK_THROWS_AS(g.with_labels(labels, 2), Error);
}

TEST_CASE("random_class_split is disjoint and seed deterministic") {
  std::vector<int> labels(200);
  for (int i = 0; i < 200; ++i) {
    labels[i] = i % 4;
  }
  const Masks a = random_class_split(labels, 4, 5, 10, 3);
  const Masks b = random_class_split(labels, 4, 5, 10, 3);
  CHECK(a == b);
  CHECK(mask_indices(a.train).size() == 20);
  CHECK(mask_indices(a.val).size() == 40);
  CHECK(mask_indices(a.test).size() == 140);
}

} // TEST_SUITE
