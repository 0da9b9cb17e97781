#pragma once

#include "gw/candidates.hpp"
#include "gw/diffnet/model.hpp"
#include "gw/graph.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gw::train {

/// Training configuration; JSON keys equal the field names.
struct TrainConfig {
  /// "gumbel" learns the adjacency; "gcn" is the plain baseline on the input edges.
  std::string model = "gumbel";
  int hidden = 64;
  int layers = 2;
  double dropout = 0.5;
  double input_dropout = 0.0;
  bool residual = false;
  bool layernorm = false;
  bool self_loops = true;
  /// Symmetrizes the input graph and the exported graph.
  bool undirected = true;
  double tau = 0.1;
  bool hard = false;
  std::string strategy = "pernode";
  std::int64_t s = 8;
  bool cosine = false;
  /// Leading feature columns fed to the edge model and classifier; 0 = all.
  /// Candidate similarity always uses every column.
  int input_columns = 0;
  std::string reg = "none";
  double lambda = 0.0;
  double d_star = 0.0;
  double delta = 1.0;
  double margin = 1.0;
  int edge_rank = 8;
  double edge_init_scale = 0.1;
  double edge_bias_init = 0.0;
  double prior_init = 2.0;
  bool learn_prior = true;
  double lr = 1e-3;
  double weight_decay = 0.0;
  int epochs = 1000;
  int patience = 100;
  /// Restores the best-validation parameters after training; otherwise the
  /// last epoch's parameters are kept.
  bool restore_best = true;
  std::uint64_t seed = 0;
  /// "accuracy", "auc", or "auto" (auc for two classes, accuracy otherwise).
  std::string metric = "auto";
  /// Evaluates on one hard Gumbel sample instead of the deterministic threshold.
  bool eval_hard_sample = false;
  /// Computes neighborhood statistics before and after training.
  bool neighborhood_stats = false;
  int stats_k_max = 10;

  void validate() const;
  bool learns_edges() const { return model == "gumbel"; }
  diffnet::ModelOptions model_options() const;
  diffnet::Objective objective() const;
};

TrainConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const TrainConfig& c);
TrainConfig load_config(const std::filesystem::path& file);

enum class Metric { kAccuracy, kAuc };
Metric resolve_metric(const std::string& name, int num_classes);
std::string to_string(Metric m);

double accuracy(const Matrix& logits, std::span<const int> labels,
                std::span<const std::uint8_t> mask);
/// Rank-based ROC-AUC of scores against binary labels (average ranks on ties).
double roc_auc(std::span<const double> scores, std::span<const int> labels);
/// ROC-AUC of the class-1 margin on the masked nodes; requires two classes.
double auc_from_logits(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::uint8_t> mask);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
};

struct NeighborhoodSnapshot {
  double class_std = 0.0;
  DegreeStats degrees;
  /// Pseudo-classes produced by the mixture decomposition.
  int clusters = 0;
};

struct RunReport {
  TrainConfig config;
  std::string metric;
  edge_t num_candidates = 0;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val = 0.0;
  double test_at_best = 0.0;
  double wall_time_s = 0.0;
  std::optional<NeighborhoodSnapshot> before;
  std::optional<NeighborhoodSnapshot> after;
};

/// Report as JSON; wall time is omitted when `include_wall_time` is false.
nlohmann::json report_to_json(const RunReport& r, bool include_wall_time = true);
void write_report(const RunReport& r, const std::filesystem::path& dir);

struct TrainResult {
  /// Input graph after the undirected conversion and column selection
  /// requested by the config.
  Graph graph;
  cand::CandidateSet candidates;
  diffnet::Model model;
  RunReport report;
};

/// Trains with early stopping on the validation metric and, unless
/// restore_best is off, restores the parameters of the best epoch.
TrainResult train(const Graph& graph, const TrainConfig& config);

/// Metric of a trained model on `graph` restricted to `mask`, with the
/// deterministic thresholded adjacency over `cands`.
double evaluate(diffnet::Model& model, const Graph& graph, const cand::CandidateSet& cands,
                std::span<const std::uint8_t> mask, Metric metric);

/// Graph whose edges are the candidate pairs with sigma(theta) > 1/2,
/// symmetrized when `undirected`.
Graph rewire_export(const Graph& graph, const diffnet::Model& model,
                    const cand::CandidateSet& cands, bool undirected);

NeighborhoodSnapshot snapshot(const Graph& graph, int k_max, std::uint64_t seed);

/// Candidate set the config prescribes for `graph`.
cand::CandidateSet make_candidates(const Graph& graph, const TrainConfig& config);

} // namespace gw::train
