#include "doctest.h"

#include "gw/diffnet/gradcheck.hpp"
#include "gw/diffnet/model.hpp"
#include "test_util.hpp"

#include <cmath>
#include <functional>

using namespace gw;
using namespace gw::diffnet;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Central-difference gradient of f at x, one coordinate at a time.
Matrix numeric_grad(Matrix x, const std::function<double(const Matrix&)>& f, double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f(x);
    x.data()[i] = keep - h;
    const double down = f(x);
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix random_probs(Eigen::Index n, Eigen::Index c, Rng& rng) {
  Matrix p = softmax_rows(gw::testing::random_features(n, static_cast<int>(c), rng));
  return p;
}

Vector random_unit(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i) = u(rng);
  }
  return z;
}

/// Row-normalized (A + I) H W + b with A from the input edges.
Matrix reference_layer(const Graph& g, const Matrix& h, const Matrix& w, const Matrix& b) {
  Matrix agg(h.rows(), h.cols());
  for (node_t i = 0; i < g.num_nodes(); ++i) {
    agg.row(i) = h.row(i);
    for (node_t j : g.neighbors(i)) {
      agg.row(i) += h.row(j);
    }
    agg.row(i) /= static_cast<double>(g.out_degree(i) + 1);
  }
  return (agg * w).rowwise() + b.row(0);
}

} // namespace

TEST_SUITE("diffnet") {

TEST_CASE("hard samples are Bernoulli(sigmoid(theta))") {
  const int draws = 40000;
  for (double theta : {-2.0, 0.0, 1.5}) {
    for (double tau : {0.1, 1.0}) {
      const auto s = gumbel_sigmoid(Vector::Constant(draws, theta), tau, 17, true);
      const double p = logistic(theta);
      const double se = std::sqrt(p * (1.0 - p) / draws);
      CHECK(std::abs(s.value.mean() - p) < 4.0 * se);
      CHECK(((s.value.array() == 0.0) || (s.value.array() == 1.0)).all());
    }
  }
}

TEST_CASE("sampler saturates, stays in range and is reproducible") {
  const Vector theta = (Vector(4) << -100.0, -1.0, 1.0, 100.0).finished();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = gumbel_sigmoid(theta, 0.1, seed, false);
    CHECK(s.value(0) < 1e-12);
    CHECK(s.value(3) > 1.0 - 1e-12);
    CHECK((s.value.array() >= 0.0).all());
    CHECK((s.value.array() <= 1.0).all());
  }
  const auto a = gumbel_sigmoid(theta, 0.5, 3, false);
  const auto b = gumbel_sigmoid(theta, 0.5, 3, false);
  CHECK(a.value == b.value);
  const auto r = relax(theta, a.noise, 0.5, false);
  CHECK(r.value == a.value);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    CHECK(a.soft(i) == doctest::Approx(logistic((theta(i) + a.noise(i)) / 0.5)));
  }
}

TEST_CASE("threshold and constant adjacencies carry no gradient path") {
  const Vector theta = (Vector(3) << -0.1, 0.0, 0.2).finished();
  const auto t = threshold_adjacency(theta);
  CHECK(t.value == (Vector(3) << 0.0, 0.0, 1.0).finished());
  CHECK(t.constant);
  const auto c = constant_adjacency(5, 1.0);
  CHECK(c.value == Vector::Ones(5));
  CHECK(c.constant);
}

TEST_CASE("sampler backward matches the relaxation derivative") {
  Rng rng(2);
  const Vector theta = gw::testing::random_features(6, 1, rng).col(0);
  const Vector noise = gw::testing::random_features(6, 1, rng).col(0);
  const Vector up = gw::testing::random_features(6, 1, rng).col(0);
  const double tau = 0.7;
  const auto soft = relax(theta, noise, tau, false);
  const Matrix fd = numeric_grad(theta, [&](const Matrix& t) {
    return relax(t.col(0), noise, tau, false).value.dot(up);
  });
  CHECK(max_abs(sampler_backward(soft, up) - fd) < 1e-8);
  // Straight-through: hard samples reuse the soft derivative.
  const auto hard = relax(theta, noise, tau, true);
  CHECK(max_abs(sampler_backward(hard, up) - sampler_backward(soft, up)) < 1e-15);
}

TEST_CASE("soft mean aggregation") {
  const Graph g = gw::testing::edge_graph(3, {{0, 1}, {0, 2}}, true);
  const auto cands = cand::existing_only(g);
  Matrix h(3, 2);
  h << 1.0, 0.0, 2.0, 4.0, 6.0, 8.0;
  const Vector z = (Vector(2) << 0.5, 1.0).finished();
  const auto with_self = aggregate(cands, z, h, true);
  CHECK(with_self.degree(0) == doctest::Approx(2.5));
  CHECK(max_abs(with_self.out.row(0) - (h.row(0) + 0.5 * h.row(1) + h.row(2)) / 2.5) < 1e-15);
  CHECK(max_abs(with_self.out.row(1) - h.row(1)) < 1e-15);

  const auto no_self = aggregate(cands, z, h, false);
  CHECK(max_abs(no_self.out.row(0) - (0.5 * h.row(1) + h.row(2)) / 1.5) < 1e-15);
  // Isolated nodes aggregate to zero without self-loops.
  CHECK(no_self.out.row(1).isZero());
  // The mean is invariant to a common scale of the weights.
  CHECK(max_abs(aggregate(cands, 3.0 * z, h, false).out - no_self.out) < 1e-14);
  CHECK_THROWS_AS(aggregate(cands, Vector::Ones(3), h, true), Error);
}

TEST_CASE("a neighborhood equal to the node leaves the mean unchanged") {
  const Graph g = gw::testing::edge_graph(4, {{0, 1}, {0, 2}, {0, 3}}, true);
  const auto cands = cand::existing_only(g);
  Matrix h = Matrix::Zero(4, 3);
  h.rowwise() += Eigen::RowVector3d(1.0, -2.0, 0.5);
  Rng rng(1);
  const auto agg = aggregate(cands, random_unit(3, rng), h, true);
  CHECK(max_abs(agg.out - h) < 1e-15);
}

TEST_CASE("constant weights on existing edges reproduce a plain GCN") {
  const Graph g = gw::testing::random_graph(40, 0.1, 3, 4, true, 5);
  const auto cands = cand::existing_only(g);
  ModelOptions opts;
  opts.gcn.hidden = 7;
  opts.gcn.dropout = 0.0;
  opts.learn_edges = false;
  Model plain(5, 3, opts, 9);
  const Matrix out = plain.forward(g.features(), cands, {});
  const Matrix w0 = plain.gcn().weight(0).value;
  const Matrix b0 = plain.gcn().bias(0).value;
  const Matrix w1 = plain.gcn().weight(1).value;
  const Matrix b1 = plain.gcn().bias(1).value;
  const Matrix hidden = reference_layer(g, g.features(), w0, b0).cwiseMax(0.0);
  CHECK(max_abs(out - reference_layer(g, hidden, w1, b1)) < 1e-12);

  // A learned edge model whose logits are all positive thresholds to the same graph.
  opts.learn_edges = true;
  opts.edge.bias_init = 50.0;
  Model learned(5, 3, opts, 9);
  CHECK(max_abs(learned.forward(g.features(), cands, {}) - out) < 1e-12);
}

TEST_CASE("model gradients agree with central differences") {
  const Graph g = gradcheck_fixture(2);
  const auto cands = cand::per_node_topk(g, 3);
  ModelOptions o;
  o.tau = 0.5;
  o.gcn.hidden = 5;
  o.gcn.dropout = 0.0;
  o.edge.rank = 2;
  o.edge.init_scale = 1.0;
  for (int layers : {1, 3}) {
    o.gcn.layers = layers;
    for (Regularizer reg : {Regularizer::kNone, Regularizer::kDegree, Regularizer::kLabel,
                            Regularizer::kNcon, Regularizer::kInter}) {
      Objective ob{.reg = reg, .lambda = 0.5, .d_star = 4.0};
      const auto rep = gradcheck(g, cands, o, ob, 5);
      INFO("layers ", layers, " reg ", to_string(reg));
      CHECK(rep.max_rel_err < 1e-4);
      CHECK_FALSE(rep.groups.empty());
    }
  }
}

TEST_CASE("cross entropy") {
  Matrix logits = Matrix::Zero(3, 4);
  const std::vector<int> y{0, 3, 1};
  const std::vector<std::uint8_t> mask{1, 1, 0};
  CHECK(cross_entropy(logits, y, mask).loss == doctest::Approx(std::log(4.0)));
  Rng rng(3);
  logits = gw::testing::random_features(3, 4, rng);
  const auto ce = cross_entropy(logits, y, mask);
  const Matrix fd = numeric_grad(logits, [&](const Matrix& l) { return cross_entropy(l, y, mask).loss; });
  CHECK(max_abs(ce.dlogits - fd) < 1e-8);
  CHECK(ce.dlogits.row(2).isZero());
  CHECK_THROWS_AS(cross_entropy(logits, y, std::vector<std::uint8_t>{0, 0, 0}), Error);
}

TEST_CASE("soft labels fix training rows and backpropagate through softmax") {
  Rng rng(4);
  const Matrix logits = gw::testing::random_features(4, 3, rng);
  const std::vector<int> y{2, 0, 1, kUnlabeled};
  const std::vector<std::uint8_t> train{1, 0, 0, 1};
  const auto soft = soft_labels(logits, y, train);
  CHECK(soft.fixed == std::vector<std::uint8_t>{1, 0, 0, 0});
  CHECK(soft.probs.row(0) == Eigen::RowVector3d(0.0, 0.0, 1.0));
  const Matrix up = gw::testing::random_features(4, 3, rng);
  const Matrix fd = numeric_grad(logits, [&](const Matrix& l) {
    return soft_labels(l, y, train).probs.cwiseProduct(up).sum();
  });
  CHECK(max_abs(soft_labels_backward(soft, up) - fd) < 1e-8);
}

TEST_CASE("degree regularizer has a dead zone above the target") {
  const Graph g = gw::testing::edge_graph(3, {{0, 1}, {0, 2}, {1, 2}}, true);
  const auto cands = cand::existing_only(g);
  // Soft degrees 1.6, 0.5, 0.
  const Vector z = (Vector(3) << 0.8, 0.8, 0.5).finished();
  const auto r = degree_reg(cands, z, 1.0, 0.5);
  const double expected = (0.0 + 1.0 * 1.0 + 1.5 * 1.5) / 3.0;
  CHECK(r.loss == doctest::Approx(expected));
  CHECK(r.dz(0) == 0.0);
  CHECK(r.dz(1) == 0.0);
  CHECK(r.dz(2) == doctest::Approx(-2.0 * 1.0 / 3.0));
  CHECK(degree_reg(cands, z, 0.0, 0.0).loss == 0.0);
  CHECK_THROWS_AS(degree_reg(cands, z, -1.0, 0.0), Error);
}

TEST_CASE("label consistency is the weighted fraction of mismatched pairs") {
  const Graph g = gw::testing::edge_graph(3, {{0, 1}, {0, 2}, {1, 2}}, true);
  const auto cands = cand::existing_only(g);
  Matrix onehot = Matrix::Zero(3, 2);
  onehot(0, 0) = onehot(1, 0) = onehot(2, 1) = 1.0;
  const Vector z = (Vector(3) << 0.5, 0.25, 0.25).finished();
  CHECK(label_consistency_reg(cands, z, onehot).loss == doctest::Approx(0.5));
  CHECK_THROWS_AS(label_consistency_reg(cands, Vector::Zero(3), onehot), Error);
  CHECK(neighborhood_consistency_reg(cands, Vector::Zero(3), onehot).loss == 0.0);
}

TEST_CASE("interclass term with collapsed prototypes") {
  const Graph g = gw::testing::edge_graph(4, {{0, 1}, {2, 3}}, true);
  const auto cands = cand::existing_only(g);
  // One-hot rows have zero entropy, so every prototype is the origin.
  Matrix onehot = Matrix::Zero(4, 3);
  onehot(0, 0) = onehot(1, 1) = onehot(2, 2) = onehot(3, 0) = 1.0;
  const std::vector<int> assigned{0, 1, 2, 0};
  const auto r = interclass_reg(cands, Vector::Ones(2), onehot, assigned, 0.8);
  CHECK(r.loss == doctest::Approx(2.0 * 0.8));
  CHECK(r.empty_classes.empty());
  const auto missing = interclass_reg(cands, Vector::Ones(2), onehot, std::vector<int>{0, 0, 2, 0}, 0.8);
  CHECK(missing.empty_classes == std::vector<int>{1});
  CHECK_THROWS_AS(interclass_reg(cands, Vector::Ones(2), onehot, assigned, 0.0), Error);
}

TEST_CASE("regularizer gradients agree with central differences") {
  const Graph g = gw::testing::random_graph(12, 0.3, 3, 6, true);
  const auto cands = cand::per_node_topk(g, 2);
  Rng rng(8);
  const Vector z = random_unit(cands.size(), rng);
  const Matrix p = random_probs(12, 3, rng);
  std::vector<int> assigned(12);
  for (int v = 0; v < 12; ++v) {
    Eigen::Index arg = 0;
    p.row(v).maxCoeff(&arg);
    assigned[v] = static_cast<int>(arg);
  }
  using Fn = std::function<RegResult(const Vector&, const Matrix&)>;
  const std::vector<std::pair<const char*, Fn>> terms{
      {"deg", [&](const Vector& zz, const Matrix&) { return degree_reg(cands, zz, 3.0, 1.0); }},
      {"label", [&](const Vector& zz, const Matrix& pp) { return label_consistency_reg(cands, zz, pp); }},
      {"ncon", [&](const Vector& zz, const Matrix& pp) { return neighborhood_consistency_reg(cands, zz, pp); }},
      {"inter", [&](const Vector& zz, const Matrix& pp) { return interclass_reg(cands, zz, pp, assigned, 2.0); }},
  };
  for (const auto& [name, fn] : terms) {
    INFO(name);
    const RegResult r = fn(z, p);
    const Matrix dz = numeric_grad(z, [&](const Matrix& zz) { return fn(zz.col(0), p).loss; });
    CHECK(max_abs(r.dz - dz) < 1e-7);
    if (r.dprobs.size()) {
      const Matrix dp = numeric_grad(p, [&](const Matrix& pp) { return fn(z, pp).loss; });
      CHECK(max_abs(r.dprobs - dp) < 1e-7);
    }
  }
}

TEST_CASE("regularizer names") {
  for (Regularizer r : {Regularizer::kNone, Regularizer::kDegree, Regularizer::kLabel,
                        Regularizer::kNcon, Regularizer::kInter}) {
    CHECK(regularizer_from_string(to_string(r)) == r);
  }
  CHECK_THROWS_AS(regularizer_from_string("l2"), Error);
}

TEST_CASE("Adam matches its closed form") {
  Param p("w", (Matrix(1, 3) << 1.0, -2.0, 0.5).finished());
  const AdamOptions opts{.lr = 0.1};
  Adam adam({&p}, opts);
  const Matrix g = (Matrix(1, 3) << 0.3, -4.0, 0.0).finished();
  Matrix expected = p.value;
  Matrix m = Matrix::Zero(1, 3);
  Matrix v = Matrix::Zero(1, 3);
  for (int t = 1; t <= 3; ++t) {
    p.grad = g * t;
    adam.step();
    m = 0.9 * m + 0.1 * (g * t);
    v = 0.999 * v + 0.001 * (g * t).cwiseAbs2();
    const Matrix mh = m / (1.0 - std::pow(0.9, t));
    const Matrix vh = v / (1.0 - std::pow(0.999, t));
    expected.array() -= 0.1 * mh.array() / (vh.array().sqrt() + 1e-8);
    CHECK(max_abs(p.value - expected) < 1e-14);
  }
  // The first step moves each coordinate by lr against the gradient sign.
  Param q("q", Matrix::Zero(1, 2));
  Adam first({&q}, opts);
  q.grad = (Matrix(1, 2) << 5.0, -0.01).finished();
  first.step();
  CHECK(q.value(0) == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(q.value(1) == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(first.steps() == 1);
}

TEST_CASE("Adam weight decay is added to the gradient") {
  Param p("w", Matrix::Constant(1, 1, 2.0));
  Adam adam({&p}, {.lr = 0.01, .weight_decay = 0.5});
  adam.zero_grad();
  adam.step();
  CHECK(p.value(0) == doctest::Approx(2.0 - 0.01).epsilon(1e-9));
}

TEST_CASE("threshold forward is deterministic and sampling depends on the seed") {
  const Graph g = gradcheck_fixture(3);
  const auto cands = cand::per_node_topk(g, 3);
  ModelOptions o;
  o.tau = 0.5;
  o.edge.init_scale = 1.0;
  o.gcn.hidden = 8;
  Model m(g.feature_dim(), g.num_classes(), o, 1);
  const Matrix a = m.forward(g.features(), cands, {});
  CHECK(m.forward(g.features(), cands, {}) == a);
  const Matrix s1 = m.forward(g.features(), cands, {.mode = AdjacencyMode::kSample, .seed = 1});
  CHECK(m.forward(g.features(), cands, {.mode = AdjacencyMode::kSample, .seed = 1}) == s1);
  CHECK(m.forward(g.features(), cands, {.mode = AdjacencyMode::kSample, .seed = 2}) != s1);
  CHECK_THROWS_AS(m.forward(g.features(), cands, {.mode = AdjacencyMode::kFixedNoise}), Error);
  CHECK_THROWS_AS(Model(3, 2, ModelOptions{.tau = 0.0}, 0), Error);
}

} // TEST_SUITE
