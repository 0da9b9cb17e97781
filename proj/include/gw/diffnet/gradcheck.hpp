#pragma once

#include "gw/diffnet/model.hpp"
#include "gw/graph.hpp"

#include <string>
#include <vector>

namespace gw::diffnet {

struct GroupError {
  std::string name;
  Eigen::Index coords = 0;
  /// max |a - b| / max(|a|, |b|, 1e-8) over the group's coordinates.
  double max_rel_err = 0.0;
};

struct GradcheckReport {
  Objective objective;
  std::vector<GroupError> groups;
  double max_rel_err = 0.0;
};

/// Small labeled graph with train/val/test masks for gradient checks.
Graph gradcheck_fixture(std::uint64_t seed, node_t n = 20, int dim = 6, int num_classes = 3);

/// Compares reverse-mode gradients of the training loss against central
/// differences with fixed Gumbel noise and no dropout.
GradcheckReport gradcheck(const Graph& graph, const cand::CandidateSet& cands,
                          const ModelOptions& opts, const Objective& objective,
                          std::uint64_t seed, double step = 1e-5);

} // namespace gw::diffnet
