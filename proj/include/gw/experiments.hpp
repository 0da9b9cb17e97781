#pragma once

#include "gw/synthgen.hpp"
#include "gw/trainer.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gw::exp {

/// Worker count: GW_THREADS when set, hardware concurrency otherwise.
int thread_count();

/// Runs fn(0..count-1) on up to thread_count() threads. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(int count, const std::function<void(int)>& fn);

struct Summary {
  double mean = 0.0;
  /// Standard error of the mean (sample std / sqrt(n)); 0 for n < 2.
  double stderr_ = 0.0;
  std::vector<double> values;
};
Summary summarize(std::vector<double> values);

/// Test metric at the best validation epoch of one run.
double train_and_test(const Graph& graph, const train::TrainConfig& config);

// Long-range dependencies on leafcount trees.
struct LongRangeConfig {
  synth::LeafcountOptions data;
  train::TrainConfig gcn2;
  train::TrainConfig gcn4;
  train::TrainConfig gumbel;
};
/// Defaults; the Gumbel budget is set to s = 4 m by run_longrange when 0.
LongRangeConfig default_longrange_config();

struct LongRangeResult {
  double gcn2 = 0.0;
  double gcn4 = 0.0;
  double gumbel = 0.0;
  edge_t num_edges = 0;
  std::int64_t s = 0;
};
LongRangeResult run_longrange(LongRangeConfig cfg);

// Oversquashing through a single bridge edge.
struct BottleneckConfig {
  synth::BottleneckOptions data;
  train::TrainConfig gcn;
  train::TrainConfig gumbel;
  int seeds = 5;
};
BottleneckConfig default_bottleneck_config();

struct BottleneckResult {
  Summary gcn;
  Summary gumbel;
  double chance = 0.0;
};
BottleneckResult run_bottleneck(const BottleneckConfig& cfg);

// Accuracy under an increasing number of neighborhood mixture components.
struct KSweepRow {
  int k = 0;
  std::string model;
  Summary acc;
};
/// For each k and seed: mixture_rewire(base, k), then train both models.
std::vector<KSweepRow> run_k_sweep(const Graph& base, const std::vector<int>& ks,
                                   const train::TrainConfig& gumbel, const train::TrainConfig& gcn,
                                   int seeds);
std::string k_sweep_csv(const std::vector<KSweepRow>& rows);
train::TrainConfig default_mixture_gumbel_config();
train::TrainConfig default_mixture_gcn_config();
synth::SbmOptions default_mixture_base();

// Degree targeting through the degree regularizer.
struct DegreeTargetResult {
  double d_star = 0.0;
  DegreeStats before;
  DegreeStats after;
  train::RunReport report;
};
/// Forces reg = deg with d* = `d_star` (average degree + 5 when negative) and
/// lambda = config.lambda (10 when the config leaves it at 0).
DegreeTargetResult run_degree_target(const Graph& graph, train::TrainConfig config,
                                     double d_star = -1.0);
train::TrainConfig default_degree_config();
/// Sparse graph whose edges, labels and features are mutually independent.
synth::SbmOptions default_degree_fixture();

// Robustness to edges injected at test nodes after training.
struct NoiseRow {
  std::int64_t k = 0;
  std::int64_t k_scaled = 0;
  std::string model;
  Summary relative;
};
/// Edge count of the reference graph the nominal noise levels refer to.
inline constexpr double kReferenceEdges = 5278.0;
std::vector<std::int64_t> default_noise_levels();
/// Trains both models per seed on the clean graph and re-evaluates them on
/// noisy copies; relative accuracy is noisy / clean with both evaluations on
/// the respective edge sets. When `scale` is set, k becomes round(k * m / 5278)
/// with m the undirected edge count.
std::vector<NoiseRow> run_noise_sweep(const Graph& graph, const train::TrainConfig& gumbel,
                                      const train::TrainConfig& gcn,
                                      const std::vector<std::int64_t>& ks, int seeds,
                                      bool scale);
std::string noise_sweep_csv(const std::vector<NoiseRow>& rows);
train::TrainConfig default_noise_gumbel_config();
train::TrainConfig default_noise_gcn_config();
synth::SbmOptions default_noise_fixture();

// Neighborhood-distribution spread before and after rewiring.
struct StdReduction {
  double before = 0.0;
  double after = 0.0;
  double relative_reduction = 0.0;
  DegreeStats degrees_before;
  DegreeStats degrees_after;
};
StdReduction run_std_reduction(const Graph& graph, const train::TrainConfig& config);

} // namespace gw::exp
