#include "gw/experiments.hpp"

#include "gw/metrics.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace gw::exp {

int thread_count() {
  if (const char* env = std::getenv("GW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) {
      return n;
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.values = std::move(values);
  const double n = static_cast<double>(s.values.size());
  if (n == 0.0) {
    return s;
  }
  for (double v : s.values) {
    s.mean += v / n;
  }
  if (n >= 2.0) {
    double ss = 0.0;
    for (double v : s.values) {
      ss += (v - s.mean) * (v - s.mean);
    }
    s.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

double train_and_test(const Graph& graph, const train::TrainConfig& config) {
  return train::train(graph, config).report.test_at_best;
}

LongRangeConfig default_longrange_config() {
  LongRangeConfig c;
  c.data.depth = 3;
  c.data.trees = 256;
  c.data.seed = 0;
  train::TrainConfig base;
  base.hidden = 64;
  base.dropout = 0.0;
  base.lr = 0.01;
  base.epochs = 600;
  base.patience = 200;
  base.input_columns = 3;
  c.gcn2 = base;
  c.gcn2.model = "gcn";
  c.gcn2.layers = 2;
  c.gcn4 = c.gcn2;
  c.gcn4.layers = 4;
  c.gumbel = base;
  c.gumbel.layers = 2;
  c.gumbel.strategy = "global";
  c.gumbel.s = 0;
  return c;
}

LongRangeResult run_longrange(LongRangeConfig cfg) {
  const Graph g = synth::gen_leafcount(cfg.data);
  LongRangeResult r;
  r.num_edges = g.num_edges();
  if (cfg.gumbel.s <= 0) {
    cfg.gumbel.s = 4 * g.num_edges();
  }
  r.s = cfg.gumbel.s;
  const std::vector<const train::TrainConfig*> configs = {&cfg.gcn2, &cfg.gcn4, &cfg.gumbel};
  std::vector<double> acc(configs.size());
  parallel_for(static_cast<int>(configs.size()),
               [&](int i) { acc[i] = train_and_test(g, *configs[i]); });
  r.gcn2 = acc[0];
  r.gcn4 = acc[1];
  r.gumbel = acc[2];
  return r;
}

BottleneckConfig default_bottleneck_config() {
  BottleneckConfig c;
  c.data.pairs = 32;
  c.data.num_classes = 4;
  train::TrainConfig base;
  base.hidden = 64;
  base.layers = 2;
  base.dropout = 0.0;
  base.lr = 0.01;
  base.epochs = 300;
  base.patience = 100;
  c.gcn = base;
  c.gcn.model = "gcn";
  c.gumbel = base;
  c.gumbel.strategy = "pernode";
  c.gumbel.s = 1;
  return c;
}

BottleneckResult run_bottleneck(const BottleneckConfig& cfg) {
  std::vector<double> gcn(cfg.seeds);
  std::vector<double> gumbel(cfg.seeds);
  parallel_for(2 * cfg.seeds, [&](int job) {
    const int seed = job / 2;
    synth::BottleneckOptions data = cfg.data;
    data.seed = cfg.data.seed + static_cast<std::uint64_t>(seed);
    const Graph g = synth::gen_bottleneck(data);
    train::TrainConfig c = job % 2 ? cfg.gumbel : cfg.gcn;
    c.seed = static_cast<std::uint64_t>(seed);
    (job % 2 ? gumbel : gcn)[seed] = train_and_test(g, c);
  });
  BottleneckResult r;
  r.gcn = summarize(gcn);
  r.gumbel = summarize(gumbel);
  const int classes = cfg.data.num_classes > 0 ? cfg.data.num_classes : cfg.data.pairs;
  r.chance = 1.0 / classes;
  return r;
}

synth::SbmOptions default_mixture_base() {
  synth::SbmOptions o;
  o.n = 1000;
  o.num_classes = 5;
  o.avg_degree = 6.0;
  o.homophily = 0.8;
  o.feature_dim = 16;
  o.class_separation = 0.5;
  o.feature_noise = 1.0;
  o.undirected = true;
  o.seed = 0;
  return o;
}

train::TrainConfig default_mixture_gcn_config() {
  train::TrainConfig c;
  c.model = "gcn";
  c.undirected = false;
  c.hidden = 64;
  c.layers = 2;
  c.dropout = 0.5;
  c.lr = 0.01;
  c.weight_decay = 5e-4;
  c.epochs = 300;
  c.patience = 50;
  return c;
}

train::TrainConfig default_mixture_gumbel_config() {
  train::TrainConfig c = default_mixture_gcn_config();
  c.model = "gumbel";
  c.strategy = "pernode";
  c.s = 10;
  return c;
}

std::vector<KSweepRow> run_k_sweep(const Graph& base, const std::vector<int>& ks,
                                   const train::TrainConfig& gumbel, const train::TrainConfig& gcn,
                                   int seeds) {
  const int jobs = static_cast<int>(ks.size()) * seeds;
  std::vector<double> acc_gumbel(jobs);
  std::vector<double> acc_gcn(jobs);
  parallel_for(2 * jobs, [&](int job) {
    const int idx = job / 2;
    const int k = ks[idx / seeds];
    const auto seed = static_cast<std::uint64_t>(idx % seeds);
    const Graph g = synth::mixture_rewire(base, k, derive_seed(seed, 100 + k)).first;
    train::TrainConfig c = job % 2 ? gumbel : gcn;
    c.seed = seed;
    (job % 2 ? acc_gumbel : acc_gcn)[idx] = train_and_test(g, c);
  });
  std::vector<KSweepRow> rows;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const auto first = static_cast<std::ptrdiff_t>(ki * seeds);
    const auto last = first + seeds;
    rows.push_back({ks[ki], "gcn",
                    summarize({acc_gcn.begin() + first, acc_gcn.begin() + last})});
    rows.push_back({ks[ki], "gumbel",
                    summarize({acc_gumbel.begin() + first, acc_gumbel.begin() + last})});
  }
  return rows;
}

std::string k_sweep_csv(const std::vector<KSweepRow>& rows) {
  std::ostringstream out;
  out << "k,model,mean,stderr\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f\n", r.k, r.model.c_str(), r.acc.mean,
                  r.acc.stderr_);
    out << buf;
  }
  return out.str();
}

train::TrainConfig default_degree_config() {
  train::TrainConfig c;
  c.model = "gumbel";
  c.undirected = false;
  c.strategy = "pernode";
  c.s = 8;
  c.reg = "deg";
  c.lambda = 10.0;
  c.delta = 1.0;
  // Proposals start below the export threshold and existing edges above it.
  c.edge_bias_init = -2.0;
  c.prior_init = 4.0;
  c.hidden = 32;
  c.dropout = 0.0;
  c.lr = 0.01;
  c.epochs = 300;
  c.patience = 300;
  c.restore_best = false;
  return c;
}

synth::SbmOptions default_degree_fixture() {
  synth::SbmOptions o;
  o.n = 500;
  o.num_classes = 5;
  o.avg_degree = 3.0;
  o.homophily = 0.2;
  o.class_separation = 0.0;
  o.undirected = true;
  return o;
}

DegreeTargetResult run_degree_target(const Graph& graph, train::TrainConfig config,
                                     double d_star) {
  DegreeTargetResult r;
  const Graph prepared = config.undirected ? to_undirected(graph) : graph;
  r.before = degree_stats(prepared);
  r.d_star = d_star >= 0.0 ? d_star : r.before.avg + 5.0;
  config.model = "gumbel";
  config.reg = "deg";
  config.d_star = r.d_star;
  if (config.lambda == 0.0) {
    config.lambda = 10.0;
  }
  auto res = train::train(graph, config);
  const Graph rewired = train::rewire_export(res.graph, res.model, res.candidates, config.undirected);
  r.after = degree_stats(rewired);
  r.report = std::move(res.report);
  return r;
}

std::vector<std::int64_t> default_noise_levels() { return {100, 500, 1000, 10000, 50000}; }

train::TrainConfig default_noise_gcn_config() {
  train::TrainConfig c = default_mixture_gcn_config();
  c.undirected = true;
  return c;
}

train::TrainConfig default_noise_gumbel_config() {
  train::TrainConfig c = default_noise_gcn_config();
  c.model = "gumbel";
  c.strategy = "pernode";
  c.s = 5;
  c.reg = "label";
  c.lambda = 1.0;
  return c;
}

synth::SbmOptions default_noise_fixture() {
  synth::SbmOptions o;
  o.n = 1000;
  o.num_classes = 5;
  o.avg_degree = 6.0;
  o.homophily = 0.8;
  o.class_separation = 1.0;
  return o;
}

std::vector<NoiseRow> run_noise_sweep(const Graph& graph, const train::TrainConfig& gumbel,
                                      const train::TrainConfig& gcn,
                                      const std::vector<std::int64_t>& ks, int seeds,
                                      bool scale) {
  const Graph base = to_undirected(graph);
  const double m_undirected = static_cast<double>(base.num_edges()) / 2.0;
  std::vector<std::int64_t> scaled;
  for (std::int64_t k : ks) {
    scaled.push_back(scale ? std::llround(k * m_undirected / kReferenceEdges) : k);
  }
  // rel[model][seed][level]
  std::vector<std::vector<std::vector<double>>> rel(
      2, std::vector<std::vector<double>>(seeds, std::vector<double>(ks.size())));
  parallel_for(2 * seeds, [&](int job) {
    const int which = job % 2;
    const int seed = job / 2;
    train::TrainConfig c = which ? gumbel : gcn;
    c.seed = static_cast<std::uint64_t>(seed);
    auto res = train::train(base, c);
    const auto metric = train::resolve_metric(c.metric, res.graph.num_classes());
    const auto& test = res.graph.masks().test;
    const double clean =
        train::evaluate(res.model, res.graph, cand::existing_only(res.graph), test, metric);
    for (std::size_t li = 0; li < ks.size(); ++li) {
      const Graph noisy = synth::inject_edge_noise(
          res.graph, scaled[li], derive_seed(static_cast<std::uint64_t>(seed), 7000 + li));
      const double acc =
          train::evaluate(res.model, noisy, cand::existing_only(noisy), noisy.masks().test, metric);
      rel[which][seed][li] = clean > 0.0 ? acc / clean : 0.0;
    }
  });
  std::vector<NoiseRow> rows;
  for (std::size_t li = 0; li < ks.size(); ++li) {
    for (int which = 0; which < 2; ++which) {
      std::vector<double> values;
      for (int seed = 0; seed < seeds; ++seed) {
        values.push_back(rel[which][seed][li]);
      }
      rows.push_back({ks[li], scaled[li], which ? "gumbel" : "gcn", summarize(values)});
    }
  }
  return rows;
}

std::string noise_sweep_csv(const std::vector<NoiseRow>& rows) {
  std::ostringstream out;
  out << "k,k_scaled,model,mean,stderr\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%lld,%s,%.6f,%.6f\n", static_cast<long long>(r.k),
                  static_cast<long long>(r.k_scaled), r.model.c_str(), r.relative.mean,
                  r.relative.stderr_);
    out << buf;
  }
  return out.str();
}

StdReduction run_std_reduction(const Graph& graph, const train::TrainConfig& config) {
  auto res = train::train(graph, config);
  const Graph rewired = train::rewire_export(res.graph, res.model, res.candidates, config.undirected);
  StdReduction r;
  r.before = metrics::class_neighborhood_std(res.graph).average;
  r.after = metrics::class_neighborhood_std(rewired).average;
  r.relative_reduction = r.before > 0.0 ? (r.before - r.after) / r.before : 0.0;
  r.degrees_before = degree_stats(res.graph);
  r.degrees_after = degree_stats(rewired);
  return r;
}

} // namespace gw::exp
