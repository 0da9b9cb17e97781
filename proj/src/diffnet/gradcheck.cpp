#include "gw/diffnet/gradcheck.hpp"

#include <algorithm>

namespace gw::diffnet {

Graph gradcheck_fixture(std::uint64_t seed, node_t n, int dim, int num_classes) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = normal(rng);
  }
  std::vector<int> labels(n);
  for (node_t v = 0; v < n; ++v) {
    labels[v] = v % num_classes;
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<Edge> edges;
  std::uniform_int_distribution<node_t> pick(0, n - 1);
  for (node_t v = 0; v < n; ++v) {
    for (int k = 0; k < 2; ++k) {
      edges.push_back({v, pick(rng)});
    }
  }
  Masks m;
  m.train.assign(n, 0);
  m.val.assign(n, 0);
  m.test.assign(n, 0);
  for (node_t v = 0; v < n; ++v) {
    (v % 5 < 2 ? m.train : (v % 5 < 4 ? m.val : m.test))[v] = 1;
  }
  return Graph::from_edges(n, std::move(edges), std::move(x), /*directed=*/false)
      .with_labels(std::move(labels), num_classes)
      .with_masks(std::move(m));
}

GradcheckReport gradcheck(const Graph& graph, const cand::CandidateSet& cands,
                          const ModelOptions& opts, const Objective& objective,
                          std::uint64_t seed, double step) {
  Model model(graph.feature_dim(), graph.num_classes(), opts, seed);
  Rng rng(derive_seed(seed, 99));
  Vector noise(cands.size());
  for (Eigen::Index e = 0; e < noise.size(); ++e) {
    const double g1 = gumbel(rng);
    const double g2 = gumbel(rng);
    noise(e) = g1 - g2;
  }
  ForwardSpec spec;
  spec.mode = AdjacencyMode::kFixedNoise;
  spec.noise = &noise;
  const auto& x = graph.features();
  const auto& labels = graph.labels();
  const auto& train = graph.masks().train;

  const auto eval = [&]() {
    model.forward(x, cands, spec);
    return model.loss(labels, train, objective).total;
  };

  model.zero_grad();
  eval();
  model.backward();

  GradcheckReport report;
  report.objective = objective;
  for (Param* p : model.params()) {
    GroupError g;
    g.name = p->name;
    g.coords = p->size();
    const Matrix analytic = p->grad;
    for (Eigen::Index k = 0; k < p->size(); ++k) {
      double& w = p->value.data()[k];
      const double saved = w;
      w = saved + step;
      const double up = eval();
      w = saved - step;
      const double down = eval();
      w = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.data()[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      g.max_rel_err = std::max(g.max_rel_err, std::abs(a - numeric) / denom);
    }
    report.max_rel_err = std::max(report.max_rel_err, g.max_rel_err);
    report.groups.push_back(std::move(g));
  }
  return report;
}

} // namespace gw::diffnet
