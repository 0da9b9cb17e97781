#include "gw/candidates.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace gw::cand {

namespace {

/// Existing edges of each row first, then the proposals not yet present.
CandidateSet assemble(const Graph& graph, const std::vector<std::vector<node_t>>& proposals,
                      Strategy strategy, std::int64_t s) {
  CandidateSet out;
  out.num_nodes = graph.num_nodes();
  out.strategy = strategy;
  out.s = s;
  out.row_ptr.assign(graph.num_nodes() + 1, 0);
  std::vector<node_t> taken;
  for (node_t v = 0; v < graph.num_nodes(); ++v) {
    const auto row = graph.neighbors(v);
    for (node_t w : row) {
      out.src.push_back(v);
      out.dst.push_back(w);
      out.existing.push_back(1);
    }
    if (!proposals.empty()) {
      taken.assign(row.begin(), row.end());
      for (node_t w : proposals[v]) {
        if (w == v) {
          continue;
        }
        // Rows are short relative to n; a linear membership scan keeps order simple.
        if (std::find(taken.begin(), taken.end(), w) != taken.end()) {
          continue;
        }
        taken.push_back(w);
        out.src.push_back(v);
        out.dst.push_back(w);
        out.existing.push_back(0);
      }
    }
    out.row_ptr[v + 1] = static_cast<edge_t>(out.src.size());
  }
  return out;
}

Matrix similarity_features(const Graph& graph, bool cosine) {
  Matrix x = graph.features();
  if (cosine) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double norm = x.row(i).norm();
      if (norm > 0.0) {
        x.row(i) /= norm;
      }
    }
  }
  return x;
}

void require_s(std::int64_t s) {
  if (s < 1) {
    throw Error("candidate budget s must be >= 1");
  }
}

struct Scored {
  double score;
  node_t i;
  node_t j;
};

/// Strict "ranks before": higher score, then lexicographically smaller pair.
bool ranks_before(const Scored& a, const Scored& b) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  return std::tie(a.i, a.j) < std::tie(b.i, b.j);
}

} // namespace

edge_t CandidateSet::num_existing() const {
  return std::count(existing.begin(), existing.end(), std::uint8_t{1});
}

std::string to_string(Strategy s) {
  switch (s) {
  case Strategy::kExisting: return "existing";
  case Strategy::kPerNode: return "pernode";
  case Strategy::kGlobal: return "global";
  case Strategy::kTwoHop: return "twohop";
  case Strategy::kRicci: return "ricci";
  }
  throw Error("unknown candidate strategy");
}

Strategy strategy_from_string(const std::string& s) {
  for (Strategy st : {Strategy::kExisting, Strategy::kPerNode, Strategy::kGlobal,
                      Strategy::kTwoHop, Strategy::kRicci}) {
    if (to_string(st) == s) {
      return st;
    }
  }
  throw Error("unknown candidate strategy: " + s);
}

CandidateSet build(const Graph& graph, const Options& opts) {
  switch (opts.strategy) {
  case Strategy::kExisting: return existing_only(graph);
  case Strategy::kPerNode: return per_node_topk(graph, opts.s, opts.cosine);
  case Strategy::kGlobal: return global_topk(graph, opts.s, opts.cosine, opts.block);
  case Strategy::kTwoHop: return two_hop_random(graph, opts.s, opts.seed);
  case Strategy::kRicci: throw Error("candidate strategy 'ricci' is unimplemented");
  }
  throw Error("unknown candidate strategy");
}

CandidateSet existing_only(const Graph& graph) {
  return assemble(graph, {}, Strategy::kExisting, 0);
}

CandidateSet per_node_topk(const Graph& graph, std::int64_t s, bool cosine) {
  require_s(s);
  const node_t n = graph.num_nodes();
  if (s >= n) {
    throw Error("per_node_topk: s=" + std::to_string(s) + " must be smaller than n=" +
                std::to_string(n));
  }
  const Matrix x = similarity_features(graph, cosine);
  std::vector<std::vector<node_t>> proposals(n);
  std::vector<node_t> order(n - 1);
  Vector scores(n);
  for (node_t i = 0; i < n; ++i) {
    scores.noalias() = x * x.row(i).transpose();
    std::iota(order.begin(), order.begin() + i, 0);
    std::iota(order.begin() + i, order.end(), i + 1);
    const auto better = [&](node_t a, node_t b) {
      return scores(a) != scores(b) ? scores(a) > scores(b) : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + s, order.end(), better);
    proposals[i].assign(order.begin(), order.begin() + s);
  }
  return assemble(graph, proposals, Strategy::kPerNode, s);
}

CandidateSet global_topk(const Graph& graph, std::int64_t s, bool cosine, int block) {
  require_s(s);
  if (block < 1) {
    throw Error("global_topk: block must be >= 1");
  }
  const node_t n = graph.num_nodes();
  const Matrix x = similarity_features(graph, cosine);
  const auto worse_on_top = [](const Scored& a, const Scored& b) { return ranks_before(a, b); };
  std::priority_queue<Scored, std::vector<Scored>, decltype(worse_on_top)> heap(worse_on_top);
  const auto cap = static_cast<std::size_t>(s);

  for (node_t r0 = 0; r0 < n; r0 += block) {
    const node_t r1 = std::min<node_t>(n, r0 + block);
    for (node_t c0 = r0; c0 < n; c0 += block) {
      const node_t c1 = std::min<node_t>(n, c0 + block);
      const Matrix tile = x.middleRows(r0, r1 - r0) * x.middleRows(c0, c1 - c0).transpose();
      for (node_t i = r0; i < r1; ++i) {
        for (node_t j = std::max(c0, i + 1); j < c1; ++j) {
          const Scored cand{tile(i - r0, j - c0), i, j};
          if (heap.size() < cap) {
            heap.push(cand);
          } else if (ranks_before(cand, heap.top())) {
            heap.pop();
            heap.push(cand);
          }
        }
      }
    }
  }
  std::vector<Scored> best;
  best.reserve(heap.size());
  while (!heap.empty()) {
    best.push_back(heap.top());
    heap.pop();
  }
  std::reverse(best.begin(), best.end());

  std::vector<std::vector<node_t>> proposals(n);
  for (const Scored& p : best) {
    proposals[p.i].push_back(p.j);
    if (!graph.directed()) {
      proposals[p.j].push_back(p.i);
    }
  }
  return assemble(graph, proposals, Strategy::kGlobal, s);
}

CandidateSet two_hop_random(const Graph& graph, std::int64_t s, std::uint64_t seed) {
  require_s(s);
  const node_t n = graph.num_nodes();
  std::vector<std::vector<node_t>> proposals(n);
  std::vector<std::uint8_t> mark(n, 0);
  std::vector<node_t> pool;
  for (node_t v = 0; v < n; ++v) {
    // mark: 1 = self or 1-hop, 2 = strict 2-hop.
    mark[v] = 1;
    for (node_t w : graph.neighbors(v)) {
      mark[w] = 1;
    }
    pool.clear();
    for (node_t w : graph.neighbors(v)) {
      for (node_t u : graph.neighbors(w)) {
        if (mark[u] == 0) {
          mark[u] = 2;
          pool.push_back(u);
        }
      }
    }
    std::sort(pool.begin(), pool.end());
    for (node_t u : pool) {
      mark[u] = 0;
    }
    mark[v] = 0;
    for (node_t w : graph.neighbors(v)) {
      mark[w] = 0;
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(s), pool.size());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v)));
    // Partial Fisher-Yates: the first `take` slots form a uniform sample.
    for (std::size_t k = 0; k < take; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    proposals[v].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return assemble(graph, proposals, Strategy::kTwoHop, s);
}

} // namespace gw::cand
