#pragma once

#include "gw/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gw::cand {

enum class Strategy { kExisting, kPerNode, kGlobal, kTwoHop, kRicci };

std::string to_string(Strategy s);
/// Accepts "existing", "pernode", "global", "twohop" and "ricci".
Strategy strategy_from_string(const std::string& s);

/// Directed node pairs scored by the edge model, grouped by source node.
///
/// Within a row the existing edges come first (ascending target), followed by
/// the proposals in rank order. No pair appears twice and every edge of the
/// input graph is present with existing = 1.
struct CandidateSet {
  node_t num_nodes = 0;
  Strategy strategy = Strategy::kExisting;
  std::int64_t s = 0;
  std::vector<node_t> src;
  std::vector<node_t> dst;
  std::vector<std::uint8_t> existing;
  /// Pairs of node v occupy [row_ptr[v], row_ptr[v + 1]).
  std::vector<edge_t> row_ptr;

  edge_t size() const noexcept { return static_cast<edge_t>(src.size()); }
  edge_t num_existing() const;
  edge_t num_proposed() const { return size() - num_existing(); }
};

struct Options {
  Strategy strategy = Strategy::kPerNode;
  std::int64_t s = 1;
  std::uint64_t seed = 0;
  /// Scores with cosine instead of raw dot-product similarity.
  bool cosine = false;
  /// Tile edge length of the blockwise global scan.
  int block = 256;
};

CandidateSet build(const Graph& graph, const Options& opts);

/// The input edges only.
CandidateSet existing_only(const Graph& graph);

/// Every node proposes its s most similar other nodes; ties go to smaller j.
CandidateSet per_node_topk(const Graph& graph, std::int64_t s, bool cosine = false);

/// The s most similar pairs i < j over the whole graph, ties broken by the
/// lexicographic pair order. Undirected graphs receive both directions.
CandidateSet global_topk(const Graph& graph, std::int64_t s, bool cosine = false,
                         int block = 256);

/// Every node proposes min(s, |N2|) uniformly drawn nodes of its strict 2-hop
/// neighborhood N2 (2-hop reachable, not adjacent, not itself).
CandidateSet two_hop_random(const Graph& graph, std::int64_t s, std::uint64_t seed);

} // namespace gw::cand
