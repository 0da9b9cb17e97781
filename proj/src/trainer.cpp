#include "gw/trainer.hpp"

#include "gw/decompose.hpp"
#include "gw/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace gw::train {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    TrainConfig, model, hidden, layers, dropout, input_dropout, residual, layernorm, self_loops,
    undirected, tau, hard, strategy, s, cosine, input_columns, reg, lambda, d_star, delta, margin, edge_rank,
    edge_init_scale, edge_bias_init, prior_init, learn_prior, lr, weight_decay, epochs, patience,
    restore_best, seed, metric, eval_hard_sample, neighborhood_stats, stats_k_max)

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw Error("invalid config: " + msg); };
  if (model != "gumbel" && model != "gcn") {
    fail("model must be 'gumbel' or 'gcn'");
  }
  if (hidden < 1 || layers < 1) {
    fail("hidden and layers must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0 || input_dropout < 0.0 || input_dropout >= 1.0) {
    fail("dropout must lie in [0, 1)");
  }
  if (!(tau > 0.0)) {
    fail("tau must be > 0");
  }
  cand::strategy_from_string(strategy);
  if (s < 1) {
    fail("s must be >= 1");
  }
  if (input_columns < 0) {
    fail("input_columns must be >= 0");
  }
  diffnet::regularizer_from_string(reg);
  if (lambda < 0.0) {
    fail("lambda must be >= 0");
  }
  if (d_star < 0.0) {
    fail("d_star must be >= 0");
  }
  if (!(margin > 0.0)) {
    fail("margin must be > 0");
  }
  if (edge_rank < 1) {
    fail("edge_rank must be >= 1");
  }
  if (!(lr > 0.0) || weight_decay < 0.0) {
    fail("lr must be > 0 and weight_decay >= 0");
  }
  if (epochs < 1 || patience < 1) {
    fail("epochs and patience must be >= 1");
  }
  if (metric != "auto" && metric != "accuracy" && metric != "auc") {
    fail("metric must be 'auto', 'accuracy' or 'auc'");
  }
}

diffnet::ModelOptions TrainConfig::model_options() const {
  diffnet::ModelOptions o;
  o.gcn.hidden = hidden;
  o.gcn.layers = layers;
  o.gcn.dropout = dropout;
  o.gcn.input_dropout = input_dropout;
  o.gcn.residual = residual;
  o.gcn.layernorm = layernorm;
  o.gcn.self_loops = self_loops;
  o.edge.rank = edge_rank;
  o.edge.init_scale = edge_init_scale;
  o.edge.bias_init = edge_bias_init;
  o.edge.prior_init = prior_init;
  o.edge.learn_prior = learn_prior;
  o.learn_edges = learns_edges();
  o.tau = tau;
  o.hard = hard;
  return o;
}

diffnet::Objective TrainConfig::objective() const {
  diffnet::Objective o;
  o.reg = diffnet::regularizer_from_string(reg);
  o.lambda = lambda;
  o.d_star = d_star;
  o.delta = delta;
  o.margin = margin;
  return o;
}

TrainConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw Error("invalid config: expected a JSON object");
  }
  const json known = json(TrainConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw Error("invalid config: unknown key '" + key + "'");
    }
  }
  TrainConfig c;
  try {
    c = j.get<TrainConfig>();
  } catch (const json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const TrainConfig& c) { return json(c); }

TrainConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw Error("missing file: " + file.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed config " + file.string() + ": " + e.what());
  }
  return config_from_json(j);
}

Metric resolve_metric(const std::string& name, int num_classes) {
  if (name == "accuracy") {
    return Metric::kAccuracy;
  }
  if (name == "auc") {
    if (num_classes != 2) {
      throw Error("auc metric requires exactly two classes, got " + std::to_string(num_classes));
    }
    return Metric::kAuc;
  }
  if (name == "auto") {
    return num_classes == 2 ? Metric::kAuc : Metric::kAccuracy;
  }
  throw Error("unknown metric: " + name);
}

std::string to_string(Metric m) { return m == Metric::kAuc ? "auc" : "accuracy"; }

double accuracy(const Matrix& logits, std::span<const int> labels,
                std::span<const std::uint8_t> mask) {
  double correct = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) {
      continue;
    }
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    correct += arg == labels[i] ? 1.0 : 0.0;
    total += 1.0;
  }
  if (total == 0.0) {
    throw Error("accuracy: empty mask");
  }
  return correct / total;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      rank[order[k]] = avg;
    }
    i = j + 1;
  }
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) {
      pos += 1.0;
      rank_sum += rank[i];
    } else if (labels[i] != 0) {
      throw Error("roc_auc: labels must be 0 or 1");
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) {
    throw Error("roc_auc: both classes must be present");
  }
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double auc_from_logits(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::uint8_t> mask) {
  if (logits.cols() != 2) {
    throw Error("auc requires exactly two classes");
  }
  std::vector<double> scores;
  std::vector<int> y;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (mask[i]) {
      scores.push_back(logits(i, 1) - logits(i, 0));
      y.push_back(labels[i]);
    }
  }
  return roc_auc(scores, y);
}

namespace {

double metric_value(const Matrix& logits, const Graph& g, std::span<const std::uint8_t> mask,
                    Metric metric) {
  return metric == Metric::kAuc ? auc_from_logits(logits, g.labels(), mask)
                                : accuracy(logits, g.labels(), mask);
}

std::vector<Matrix> save_values(const diffnet::Model& model) {
  std::vector<Matrix> out;
  for (const diffnet::Param* p : model.params()) {
    out.push_back(p->value);
  }
  return out;
}

void restore_values(diffnet::Model& model, const std::vector<Matrix>& values) {
  auto params = model.params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k]->value = values[k];
  }
}

json snapshot_json(const NeighborhoodSnapshot& s) {
  return {{"class_neighborhood_std", s.class_std},
          {"degree_min", s.degrees.min},
          {"degree_avg", s.degrees.avg},
          {"degree_max", s.degrees.max},
          {"clusters", s.clusters}};
}

} // namespace

cand::CandidateSet make_candidates(const Graph& graph, const TrainConfig& config) {
  if (!config.learns_edges()) {
    return cand::existing_only(graph);
  }
  cand::Options o;
  o.strategy = cand::strategy_from_string(config.strategy);
  o.s = config.s;
  o.seed = derive_seed(config.seed, 11);
  o.cosine = config.cosine;
  return cand::build(graph, o);
}

double evaluate(diffnet::Model& model, const Graph& graph, const cand::CandidateSet& cands,
                std::span<const std::uint8_t> mask, Metric metric) {
  diffnet::ForwardSpec spec;
  spec.mode = diffnet::AdjacencyMode::kThreshold;
  const Matrix& logits = model.forward(graph.features(), cands, spec);
  return metric_value(logits, graph, mask, metric);
}

Graph rewire_export(const Graph& graph, const diffnet::Model& model,
                    const cand::CandidateSet& cands, bool undirected) {
  if (!model.options().learn_edges) {
    return graph;
  }
  const Vector theta = model.edge_logits(graph.features(), cands);
  std::vector<Edge> edges;
  for (edge_t e = 0; e < cands.size(); ++e) {
    if (theta(e) > 0.0) {
      edges.push_back({cands.src[e], cands.dst[e]});
    }
  }
  return graph.with_edges(std::move(edges), !undirected);
}

NeighborhoodSnapshot snapshot(const Graph& graph, int k_max, std::uint64_t seed) {
  NeighborhoodSnapshot s;
  s.class_std = metrics::class_neighborhood_std(graph).average;
  s.degrees = degree_stats(graph);
  s.clusters = decompose::decompose_classes(graph, k_max, seed).num_pseudo();
  return s;
}

TrainResult train(const Graph& input, const TrainConfig& config) {
  config.validate();
  if (!input.has_labels() || !input.has_masks()) {
    throw Error("train: graph needs labels and masks");
  }
  const auto& m = input.masks();
  for (const auto& [name, mask] : {std::pair{"train", &m.train}, {"val", &m.val}, {"test", &m.test}}) {
    if (std::find(mask->begin(), mask->end(), std::uint8_t{1}) == mask->end()) {
      throw Error(std::string("train: ") + name + " mask selects no node");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  TrainResult res;
  res.graph = config.undirected ? to_undirected(input) : input;
  res.candidates = make_candidates(res.graph, config);
  if (config.input_columns > 0) {
    if (config.input_columns > res.graph.feature_dim()) {
      throw Error("invalid config: input_columns exceeds the feature dimension");
    }
    res.graph = res.graph.with_features(res.graph.features().leftCols(config.input_columns));
  }
  const Graph& g = res.graph;
  const Metric metric = resolve_metric(config.metric, g.num_classes());
  res.model = diffnet::Model(g.feature_dim(), g.num_classes(), config.model_options(),
                             derive_seed(config.seed, 1));
  diffnet::Adam adam(res.model.params(), {config.lr, 0.9, 0.999, 1e-8, config.weight_decay});
  const diffnet::Objective objective = config.objective();
  const auto& labels = g.labels();
  const auto& masks = g.masks();

  RunReport& report = res.report;
  report.config = config;
  report.metric = to_string(metric);
  report.num_candidates = res.candidates.size();
  if (config.neighborhood_stats) {
    report.before = snapshot(g, config.stats_k_max, config.seed);
  }

  Rng dropout_rng(derive_seed(config.seed, 2));
  std::vector<Matrix> best_values = save_values(res.model);
  double best_val = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    adam.zero_grad();
    diffnet::ForwardSpec spec;
    spec.mode = diffnet::AdjacencyMode::kSample;
    spec.seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch));
    spec.dropout_rng = &dropout_rng;
    res.model.forward(g.features(), res.candidates, spec);
    const auto loss = res.model.loss(labels, masks.train, objective);
    if (!std::isfinite(loss.total)) {
      throw Error("train: non-finite loss at epoch " + std::to_string(epoch) + " (ce=" +
                  std::to_string(loss.ce) + ", reg=" + std::to_string(loss.reg) + ")");
    }
    res.model.backward();
    adam.step();

    diffnet::ForwardSpec eval_spec;
    eval_spec.mode = config.eval_hard_sample ? diffnet::AdjacencyMode::kSample
                                             : diffnet::AdjacencyMode::kThreshold;
    eval_spec.seed = derive_seed(config.seed, 500000 + static_cast<std::uint64_t>(epoch));
    const Matrix& logits = res.model.forward(g.features(), res.candidates, eval_spec);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss.total;
    rec.val_metric = metric_value(logits, g, masks.val, metric);
    rec.test_metric = metric_value(logits, g, masks.test, metric);
    const double val_loss = diffnet::cross_entropy(logits, labels, masks.val).loss;
    report.history.push_back(rec);

    // Ties on the validation metric fall back to the validation loss.
    if (rec.val_metric > best_val || (rec.val_metric == best_val && val_loss < best_val_loss)) {
      best_val = rec.val_metric;
      best_val_loss = val_loss;
      report.best_epoch = epoch;
      report.best_val = rec.val_metric;
      report.test_at_best = rec.test_metric;
      best_values = save_values(res.model);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (config.restore_best) {
    restore_values(res.model, best_values);
  }
  if (config.neighborhood_stats) {
    const Graph rewired = rewire_export(g, res.model, res.candidates, config.undirected);
    report.after = snapshot(rewired, config.stats_k_max, config.seed);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

json report_to_json(const RunReport& r, bool include_wall_time) {
  json j;
  j["config"] = config_to_json(r.config);
  j["metric"] = r.metric;
  j["num_candidates"] = r.num_candidates;
  j["epochs_run"] = r.history.size();
  j["best_epoch"] = r.best_epoch;
  j["best_val"] = r.best_val;
  j["test_at_best"] = r.test_at_best;
  json hist = json::array();
  for (const auto& e : r.history) {
    hist.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_metric", e.val_metric},
                    {"test_metric", e.test_metric}});
  }
  j["history"] = std::move(hist);
  if (r.before) {
    j["before"] = snapshot_json(*r.before);
  }
  if (r.after) {
    j["after"] = snapshot_json(*r.after);
  }
  if (include_wall_time) {
    j["wall_time_s"] = r.wall_time_s;
  }
  return j;
}

void write_report(const RunReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) {
      throw Error("cannot write " + (dir / "report.json").string());
    }
    out << report_to_json(r).dump(2) << '\n';
  }
  std::ofstream out(dir / "history.csv");
  if (!out) {
    throw Error("cannot write " + (dir / "history.csv").string());
  }
  out << "epoch,train_loss,val_metric,test_metric\n";
  char buf[128];
  for (const auto& e : r.history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_metric,
                  e.test_metric);
    out << buf;
  }
}

} // namespace gw::train
