#include "gw/bundle.hpp"
#include "gw/candidates.hpp"
#include "gw/decompose.hpp"
#include "gw/diffnet/gradcheck.hpp"
#include "gw/experiments.hpp"
#include "gw/metrics.hpp"
#include "gw/synthgen.hpp"
#include "gw/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gw;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json degrees_json(const DegreeStats& d) { return {{"min", d.min}, {"avg", d.avg}, {"max", d.max}}; }

json metrics_json(const metrics::MetricsReport& r) {
  return {{"h_edge", optional_json(r.h_edge)},
          {"h_adj", optional_json(r.h_adj)},
          {"li", optional_json(r.li)},
          {"class_std", r.neighborhood_std.average},
          {"class_std_per_class", r.neighborhood_std.per_class},
          {"degrees", degrees_json(r.degrees)},
          {"warnings", r.warnings}};
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) {
    fs::create_directories(file.parent_path());
  }
  std::ofstream out(file);
  if (!out) {
    throw Error("cannot write " + file.string());
  }
  out << text;
}

/// Writes `text` to `file`, or to stdout when `file` is empty.
void emit(const std::string& file, const std::string& text) {
  if (file.empty()) {
    std::cout << text;
  } else {
    write_text(file, text);
  }
}

train::TrainConfig config_or(const std::string& file, train::TrainConfig fallback) {
  return file.empty() ? fallback : train::load_config(file);
}

json params_json(const diffnet::Model& model) {
  json out = json::array();
  for (const diffnet::Param* p : model.params()) {
    out.push_back({{"name", p->name},
                   {"rows", p->value.rows()},
                   {"cols", p->value.cols()},
                   {"values", std::vector<double>(p->value.data(), p->value.data() + p->value.size())}});
  }
  return out;
}

json summary_json(const exp::Summary& s) {
  return {{"mean", s.mean}, {"stderr", s.stderr_}, {"values", s.values}};
}

void add_metrics(CLI::App& app) {
  auto* cmd = app.add_subcommand("metrics", "Graph and label statistics as JSON");
  static std::string bundle;
  static std::string csv;
  static std::string name;
  cmd->add_option("bundle", bundle, "bundle directory")->required();
  cmd->add_option("--csv", csv, "append a CSV row (name,h_edge,h_adj,li,class_std,avg_degree)");
  cmd->add_option("--name", name, "row name for --csv (default: bundle directory name)");
  cmd->callback([] {
    const Graph g = load_bundle(bundle);
    const auto r = metrics::compute_report(g);
    std::cout << metrics_json(r).dump(2) << '\n';
    if (csv.empty()) {
      return;
    }
    const bool fresh = !fs::exists(csv);
    std::ofstream out(csv, std::ios::app);
    if (!out) {
      throw Error("cannot write " + csv);
    }
    if (fresh) {
      out << "name,h_edge,h_adj,li,class_std,avg_degree\n";
    }
    auto cell = [](const std::optional<double>& v) { return v ? std::to_string(*v) : ""; };
    out << (name.empty() ? fs::path(bundle).filename().string() : name) << ',' << cell(r.h_edge)
        << ',' << cell(r.h_adj) << ',' << cell(r.li) << ',' << r.neighborhood_std.average << ','
        << r.degrees.avg << '\n';
  });
}

void add_decompose(CLI::App& app) {
  auto* cmd = app.add_subcommand("decompose", "Split classes into neighborhood mixture components");
  static std::string bundle;
  static std::string out;
  static int k_max = 25;
  static std::uint64_t seed = 0;
  cmd->add_option("bundle", bundle, "bundle directory")->required();
  cmd->add_option("--kmax", k_max, "largest mixture size tried per class")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", seed, "EM seed");
  cmd->add_option("--out", out, "output bundle directory")->required();
  cmd->callback([] {
    const Graph g = load_bundle(bundle);
    const auto dec = decompose::decompose_classes(g, k_max, seed);
    save_bundle(decompose::relabel_graph(g, dec), out);
    write_int_lines(g.labels(), fs::path(out) / "original_labels.csv");
    json classes = json::array();
    for (const auto& c : dec.classes) {
      classes.push_back({{"class", c.cls},
                         {"k", c.gmm_k},
                         {"pseudo_classes", c.num_pseudo},
                         {"isolated_nodes", c.isolated_nodes},
                         {"bic", c.bic_curve}});
    }
    const json report{{"kmax", k_max},
                      {"seed", seed},
                      {"num_pseudo", dec.num_pseudo()},
                      {"pseudo_to_class", dec.pseudo_to_class},
                      {"classes", classes}};
    write_text(fs::path(out) / "decomposition.json", report.dump(2) + "\n");
    std::cout << "classes " << g.num_classes() << " -> pseudo-classes " << dec.num_pseudo() << '\n';
  });
}

void add_gen(CLI::App& app) {
  auto* gen = app.add_subcommand("gen", "Synthetic graph bundles");
  gen->require_subcommand(1);

  {
    auto* cmd = gen->add_subcommand("mixture", "Rewire a base graph with k-component neighborhoods");
    static std::string base;
    static std::string out;
    static int k = 1;
    static std::uint64_t seed = 0;
    static synth::SbmOptions sbm = exp::default_mixture_base();
    cmd->add_option("--base", base, "base bundle (default: planted-partition graph)");
    cmd->add_option("--n", sbm.n, "base nodes when generated");
    cmd->add_option("--classes", sbm.num_classes, "base classes when generated");
    cmd->add_option("--k", k, "mixture components per class")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "rewiring seed");
    cmd->add_option("--out", out, "output bundle directory")->required();
    cmd->callback([] {
      const Graph g = base.empty() ? synth::gen_sbm(sbm) : load_bundle(base);
      auto [mixed, spec] = synth::mixture_rewire(g, k, seed);
      save_bundle(mixed, out);
      write_text(fs::path(out) / "mixture.json",
                 json{{"k", spec.k}, {"supports", spec.supports}, {"node_component", spec.node_component}}
                         .dump() +
                     "\n");
    });
  }
  {
    auto* cmd = gen->add_subcommand("leafcount", "Binary trees labeled by their 1-leaf count");
    static synth::LeafcountOptions o;
    static std::string out;
    cmd->add_option("--depth", o.depth, "tree depth R")->check(CLI::PositiveNumber);
    cmd->add_option("--trees", o.trees, "number of trees (0 = 2^R)");
    cmd->add_option("--tree-id-scale", o.tree_id_scale, "scale of the tree-id feature channel");
    cmd->add_option("--seed", o.seed, "seed");
    cmd->add_option("--out", out, "output bundle directory")->required();
    cmd->callback([] { save_bundle(synth::gen_leafcount(o), out); });
  }
  {
    auto* cmd = gen->add_subcommand("bottleneck", "Two sides joined by a single bridge edge");
    static synth::BottleneckOptions o;
    static std::string out;
    cmd->add_option("--pairs", o.pairs, "nodes per side")->check(CLI::PositiveNumber);
    cmd->add_option("--classes", o.num_classes, "payload classes (0 = pairs)");
    cmd->add_option("--seed", o.seed, "seed");
    cmd->add_option("--out", out, "output bundle directory")->required();
    cmd->callback([] { save_bundle(synth::gen_bottleneck(o), out); });
  }
  {
    auto* cmd = gen->add_subcommand("noise", "Inject random edges at test nodes");
    static std::string bundle;
    static std::string out;
    static std::int64_t k = 0;
    static std::uint64_t seed = 0;
    cmd->add_option("--bundle", bundle, "input bundle")->required();
    cmd->add_option("--k", k, "injection attempts")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "seed");
    cmd->add_option("--out", out, "output bundle directory")->required();
    cmd->callback([] { save_bundle(synth::inject_edge_noise(load_bundle(bundle), k, seed), out); });
  }
  {
    auto* cmd = gen->add_subcommand("sbm", "Planted-partition graph with Gaussian features");
    static synth::SbmOptions o;
    static std::string out;
    static bool directed = false;
    cmd->add_option("--n", o.n, "nodes");
    cmd->add_option("--classes", o.num_classes, "classes");
    cmd->add_option("--avg-degree", o.avg_degree, "average degree");
    cmd->add_option("--homophily", o.homophily, "same-class edge probability");
    cmd->add_option("--dim", o.feature_dim, "feature dimension");
    cmd->add_option("--separation", o.class_separation, "class mean scale");
    cmd->add_flag("--directed", directed, "keep edges directed");
    cmd->add_option("--seed", o.seed, "seed");
    cmd->add_option("--out", out, "output bundle directory")->required();
    cmd->callback([] {
      o.undirected = !directed;
      save_bundle(synth::gen_sbm(o), out);
    });
  }
}

void add_candidates(CLI::App& app) {
  auto* cmd = app.add_subcommand("candidates", "Candidate pairs for edge sampling as CSV");
  static std::string bundle;
  static std::string out;
  static std::string strategy = "pernode";
  static cand::Options o;
  cmd->add_option("bundle", bundle, "bundle directory")->required();
  cmd->add_option("--strategy", strategy, "existing|pernode|global|twohop");
  cmd->add_option("--s", o.s, "candidate budget")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "seed for twohop sampling");
  cmd->add_flag("--cosine", o.cosine, "cosine instead of dot-product similarity");
  cmd->add_option("--out", out, "output CSV (default: stdout)");
  cmd->callback([] {
    o.strategy = cand::strategy_from_string(strategy);
    const auto c = cand::build(load_bundle(bundle), o);
    std::string text = "src,dst,existing\n";
    for (edge_t e = 0; e < c.size(); ++e) {
      text += std::to_string(c.src[e]) + ',' + std::to_string(c.dst[e]) + ',' +
              std::to_string(int{c.existing[e]}) + '\n';
    }
    emit(out, text);
  });
}

void add_train(CLI::App& app) {
  static std::string config;
  static std::string bundle;
  static std::string out;
  {
    auto* cmd = app.add_subcommand("train", "Train one model and write report.json + history.csv");
    cmd->add_option("--config", config, "TrainConfig JSON");
    cmd->add_option("--bundle", bundle, "bundle directory")->required();
    cmd->add_option("--out", out, "run directory")->required();
    cmd->callback([] {
      auto res = train::train(load_bundle(bundle), config_or(config, {}));
      train::write_report(res.report, out);
      write_text(fs::path(out) / "params.json", params_json(res.model).dump() + "\n");
      std::cout << res.report.metric << " test " << res.report.test_at_best << " (best epoch "
                << res.report.best_epoch << ")\n";
    });
  }
  {
    auto* cmd = app.add_subcommand("rewire", "Train, then export the thresholded graph as a bundle");
    cmd->add_option("--config", config, "TrainConfig JSON (model must be gumbel)");
    cmd->add_option("--bundle", bundle, "bundle directory")->required();
    cmd->add_option("--out", out, "run directory; the graph goes to <out>/graph")->required();
    cmd->callback([] {
      const auto cfg = config_or(config, {});
      if (!cfg.learns_edges()) {
        throw Error("rewire requires model \"gumbel\"");
      }
      const Graph input = load_bundle(bundle);
      auto res = train::train(input, cfg);
      // Export keeps every input column; training may only see a prefix.
      const Graph rewired = train::rewire_export(res.graph, res.model, res.candidates, cfg.undirected)
                                .with_features(input.features());
      train::write_report(res.report, out);
      save_bundle(rewired, fs::path(out) / "graph");
      const json summary{{"before", metrics_json(metrics::compute_report(res.graph))},
                         {"after", metrics_json(metrics::compute_report(rewired))}};
      write_text(fs::path(out) / "rewire.json", summary.dump(2) + "\n");
      std::cout << "edges " << res.graph.num_edges() << " -> " << rewired.num_edges() << '\n';
    });
  }
}

void add_experiments(CLI::App& app) {
  {
    auto* cmd = app.add_subcommand("sweep-k", "Accuracy versus neighborhood mixture size");
    static std::string bundle;
    static std::string gumbel;
    static std::string gcn;
    static std::string out;
    static int k_min = 1;
    static int k_max = 7;
    static int seeds = 5;
    cmd->add_option("--bundle", bundle, "base bundle (default: planted-partition graph)");
    cmd->add_option("--gumbel-config", gumbel, "TrainConfig for the rewiring model");
    cmd->add_option("--gcn-config", gcn, "TrainConfig for the baseline");
    cmd->add_option("--k-min", k_min, "smallest k")->check(CLI::PositiveNumber);
    cmd->add_option("--k-max", k_max, "largest k")->check(CLI::PositiveNumber);
    cmd->add_option("--seeds", seeds, "seeds per k")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output CSV (default: stdout)");
    cmd->callback([] {
      const Graph base = bundle.empty() ? synth::gen_sbm(exp::default_mixture_base()) : load_bundle(bundle);
      std::vector<int> ks;
      for (int k = k_min; k <= k_max; ++k) {
        ks.push_back(k);
      }
      const auto rows = exp::run_k_sweep(base, ks, config_or(gumbel, exp::default_mixture_gumbel_config()),
                                         config_or(gcn, exp::default_mixture_gcn_config()), seeds);
      emit(out, exp::k_sweep_csv(rows));
    });
  }
  {
    auto* cmd = app.add_subcommand("degree-target", "Push the exported average degree towards d*");
    static std::string bundle;
    static std::string config;
    static std::string out;
    static double d_star = -1.0;
    cmd->add_option("--bundle", bundle, "bundle (default: random sparse graph)");
    cmd->add_option("--config", config, "TrainConfig JSON");
    cmd->add_option("--d-star", d_star, "target degree (negative: average degree + 5)");
    cmd->add_option("--out", out, "run directory")->required();
    cmd->callback([] {
      const Graph g = bundle.empty() ? synth::gen_sbm(exp::default_degree_fixture()) : load_bundle(bundle);
      const auto r = exp::run_degree_target(g, config_or(config, exp::default_degree_config()), d_star);
      train::write_report(r.report, out);
      const json summary{{"d_star", r.d_star}, {"before", degrees_json(r.before)}, {"after", degrees_json(r.after)}};
      write_text(fs::path(out) / "degrees.json", summary.dump(2) + "\n");
      std::cout << "average degree " << r.before.avg << " -> " << r.after.avg << " (d* = " << r.d_star
                << ")\n";
    });
  }
  {
    auto* cmd = app.add_subcommand("noise-sweep", "Relative accuracy under injected test-edge noise");
    static std::string bundle;
    static std::string gumbel;
    static std::string gcn;
    static std::string out;
    static std::vector<std::int64_t> levels = exp::default_noise_levels();
    static int seeds = 5;
    static bool no_scale = false;
    cmd->add_option("--bundle", bundle, "bundle (default: homophilic planted-partition graph)");
    cmd->add_option("--gumbel-config", gumbel, "TrainConfig for the rewiring model");
    cmd->add_option("--gcn-config", gcn, "TrainConfig for the baseline");
    cmd->add_option("--levels", levels, "nominal noise levels");
    cmd->add_option("--seeds", seeds, "seeds")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-scale", no_scale, "use the nominal levels unscaled");
    cmd->add_option("--out", out, "output CSV (default: stdout)");
    cmd->callback([] {
      const Graph g = bundle.empty() ? synth::gen_sbm(exp::default_noise_fixture()) : load_bundle(bundle);
      const auto rows = exp::run_noise_sweep(g, config_or(gumbel, exp::default_noise_gumbel_config()),
                                             config_or(gcn, exp::default_noise_gcn_config()), levels, seeds,
                                             !no_scale);
      emit(out, exp::noise_sweep_csv(rows));
    });
  }
  {
    auto* cmd = app.add_subcommand("longrange", "Leaf counting with shallow, deep and rewired models");
    static exp::LongRangeConfig cfg = exp::default_longrange_config();
    static std::string out;
    cmd->add_option("--depth", cfg.data.depth, "tree depth")->check(CLI::PositiveNumber);
    cmd->add_option("--trees", cfg.data.trees, "number of trees");
    cmd->add_option("--seed", cfg.data.seed, "data seed");
    cmd->add_option("--out", out, "output JSON (default: stdout)");
    cmd->callback([] {
      const auto r = exp::run_longrange(cfg);
      emit(out, json{{"gcn2", r.gcn2}, {"gcn4", r.gcn4}, {"gumbel", r.gumbel}, {"edges", r.num_edges}, {"s", r.s}}
                        .dump(2) +
                    "\n");
    });
  }
  {
    auto* cmd = app.add_subcommand("bottleneck", "Oversquashing through a single bridge edge");
    static exp::BottleneckConfig cfg = exp::default_bottleneck_config();
    static std::string out;
    cmd->add_option("--pairs", cfg.data.pairs, "nodes per side")->check(CLI::PositiveNumber);
    cmd->add_option("--classes", cfg.data.num_classes, "payload classes (0 = pairs)");
    cmd->add_option("--seeds", cfg.seeds, "seeds")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output JSON (default: stdout)");
    cmd->callback([] {
      const auto r = exp::run_bottleneck(cfg);
      emit(out, json{{"gcn", summary_json(r.gcn)}, {"gumbel", summary_json(r.gumbel)}, {"chance", r.chance}}
                        .dump(2) +
                    "\n");
    });
  }
}

void add_gradcheck(CLI::App& app) {
  auto* cmd = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  static std::uint64_t seed = 1;
  static double tolerance = 1e-4;
  cmd->add_option("--seed", seed, "fixture seed");
  cmd->add_option("--tolerance", tolerance, "maximum relative error");
  cmd->callback([] {
    const Graph g = diffnet::gradcheck_fixture(seed);
    const auto cands = cand::per_node_topk(g, 2);
    double worst = 0.0;
    for (bool deep : {false, true}) {
      diffnet::ModelOptions o;
      o.tau = 1.0;
      o.gcn.hidden = 6;
      o.gcn.dropout = 0.0;
      o.gcn.layernorm = deep;
      o.gcn.residual = deep;
      o.edge.rank = 3;
      o.edge.init_scale = 1.0;
      o.edge.prior_init = 1.0;
      for (auto reg : {diffnet::Regularizer::kNone, diffnet::Regularizer::kDegree, diffnet::Regularizer::kLabel,
                       diffnet::Regularizer::kNcon, diffnet::Regularizer::kInter}) {
        diffnet::Objective ob;
        ob.reg = reg;
        ob.lambda = reg == diffnet::Regularizer::kNone ? 0.0 : 0.7;
        ob.d_star = 5.0;
        const auto rep = diffnet::gradcheck(g, cands, o, ob, seed + 2);
        for (const auto& grp : rep.groups) {
          std::printf("%-6s %-7s %-16s %5ld  %.3e\n", diffnet::to_string(reg).c_str(),
                      deep ? "ln+res" : "plain", grp.name.c_str(), static_cast<long>(grp.coords),
                      grp.max_rel_err);
        }
        worst = std::max(worst, rep.max_rel_err);
      }
    }
    std::printf("max relative error %.3e (tolerance %.1e)\n", worst, tolerance);
    if (worst >= tolerance) {
      throw CLI::RuntimeError(1);
    }
  });
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable graph rewiring toolkit"};
  app.require_subcommand(1);
  add_metrics(app);
  add_decompose(app);
  add_gen(app);
  add_candidates(app);
  add_train(app);
  add_experiments(app);
  add_gradcheck(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
