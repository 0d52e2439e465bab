#pragma once

#include "cmdp/model.hpp"

#include <vector>

namespace cmdp::detail {

/// State graph on the support of a kernel: x -> y whenever some action with
/// positive weight at x moves to y with positive probability.
struct SupportGraph {
  std::vector<std::vector<Index>> successors;
  std::vector<bool> leaks;  // positive absorption under the weighted actions

  Index size() const { return static_cast<Index>(successors.size()); }
};

/// Graph induced by a pair-indexed action weight vector (strategy kernel or
/// a 0/1 mask of allowed pairs).
SupportGraph support_graph(const FiniteMdpModel& model, const Eigen::VectorXd& pair_weights);

/// Marks every state reachable from the seeds (seeds included).
std::vector<bool> forward_reachable(const SupportGraph& g, const std::vector<bool>& seeds);

/// Marks every state from which some target is reachable (targets included).
std::vector<bool> backward_reachable(const SupportGraph& g, const std::vector<bool>& targets);

/// Strongly connected components restricted to `alive`; component id per
/// state, -1 for states outside `alive`. Ids follow discovery order from the
/// lowest state index.
std::vector<Index> strongly_connected_components(const std::vector<std::vector<Index>>& successors,
                                                 const std::vector<bool>& alive,
                                                 Index* component_count);

}  // namespace cmdp::detail
