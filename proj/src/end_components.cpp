#include "cmdp/mixture.hpp"

#include "support_graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace cmdp {

std::vector<std::vector<Index>> maximal_end_components(const FiniteMdpModel& model,
                                                       const Eigen::VectorXd& mask) {
  const Index n_states = model.num_states();
  const Index n_pairs = model.num_pairs();
  std::vector<bool> alive(static_cast<std::size_t>(n_pairs));
  for (Index k = 0; k < n_pairs; ++k) alive[k] = mask[k] != 0.0 && model.absorption()[k] == 0.0;

  std::vector<Index> comp;
  for (;;) {
    std::vector<bool> state_alive(static_cast<std::size_t>(n_states), false);
    std::vector<std::vector<Index>> succ(static_cast<std::size_t>(n_states));
    for (Index k = 0; k < n_pairs; ++k) {
      if (!alive[k]) continue;
      Index x = model.state_of(k);
      state_alive[x] = true;
      for (Index y = 0; y < n_states; ++y)
        if (model.p(k, y) > 0.0) succ[x].push_back(y);
    }
    comp = detail::strongly_connected_components(succ, state_alive, nullptr);

    bool changed = false;
    for (Index k = 0; k < n_pairs; ++k) {
      if (!alive[k]) continue;
      Index x = model.state_of(k);
      for (Index y = 0; y < n_states; ++y) {
        if (model.p(k, y) > 0.0 && (!state_alive[y] || comp[y] != comp[x])) {
          alive[k] = false;
          changed = true;
          break;
        }
      }
    }
    if (!changed) break;
  }

  std::vector<std::vector<Index>> out;
  std::vector<Index> slot(static_cast<std::size_t>(n_states) + 1, -1);
  for (Index k = 0; k < n_pairs; ++k) {
    if (!alive[k]) continue;
    Index c = comp[model.state_of(k)];
    if (slot[c] < 0) {
      slot[c] = static_cast<Index>(out.size());
      out.emplace_back();
    }
    out[slot[c]].push_back(k);
  }
  // Pairs are visited in state order, so components already come ordered by
  // their lowest state and each list is sorted.
  return out;
}

AssumptionCheck check_penalization_assumption(const FiniteMdpModel& model) {
  const Index n_pairs = model.num_pairs();
  Eigen::VectorXd zero_cost(n_pairs);
  for (Index k = 0; k < n_pairs; ++k) zero_cost[k] = model.costs().col(k).maxCoeff() == 0.0 ? 1.0 : 0.0;
  auto components = maximal_end_components(model, zero_cost);

  auto g = detail::support_graph(model, Eigen::VectorXd::Ones(n_pairs));
  std::vector<bool> seed(static_cast<std::size_t>(model.num_states()), false);
  seed[model.initial()] = true;
  auto reach = detail::forward_reachable(g, seed);

  AssumptionCheck out;
  for (auto& c : components) {
    if (reach[model.state_of(c.front())]) {
      out.holds = false;
      out.witness = c;
      break;
    }
  }
  return out;
}

AssumptionCheck check_penalization_assumption(const ConstrainedProblem& problem) {
  return check_penalization_assumption(problem.model);
}

StationaryStrategy stay_forever_strategy(const FiniteMdpModel& model,
                                         const std::vector<Index>& witness_pairs) {
  const Index n_states = model.num_states();
  std::vector<bool> in_component(static_cast<std::size_t>(n_states), false);
  for (Index k : witness_pairs) in_component[model.state_of(k)] = true;

  // Breadth-first distance to the component over the full support graph.
  std::vector<std::vector<Index>> pred(static_cast<std::size_t>(n_states));
  for (Index k = 0; k < model.num_pairs(); ++k)
    for (Index y = 0; y < n_states; ++y)
      if (model.p(k, y) > 0.0) pred[y].push_back(model.state_of(k));
  constexpr Index kFar = std::numeric_limits<Index>::max();
  std::vector<Index> dist(static_cast<std::size_t>(n_states), kFar);
  std::deque<Index> queue;
  for (Index x = 0; x < n_states; ++x)
    if (in_component[x]) {
      dist[x] = 0;
      queue.push_back(x);
    }
  while (!queue.empty()) {
    Index y = queue.front();
    queue.pop_front();
    for (Index x : pred[y])
      if (dist[x] == kFar) {
        dist[x] = dist[y] + 1;
        queue.push_back(x);
      }
  }

  StationaryStrategy s{Eigen::VectorXd::Zero(model.num_pairs())};
  for (Index x = 0; x < n_states; ++x) {
    if (in_component[x]) {
      Index count = 0;
      for (Index k : witness_pairs)
        if (model.state_of(k) == x) ++count;
      for (Index k : witness_pairs)
        if (model.state_of(k) == x) s.probs[k] = 1.0 / static_cast<double>(count);
      continue;
    }
    Index chosen = model.pair(x, 0);
    if (dist[x] != kFar) {
      for (Index k = model.pair_begin(x); k < model.pair_end(x); ++k) {
        bool closer = false;
        for (Index y = 0; y < n_states && !closer; ++y)
          closer = model.p(k, y) > 0.0 && dist[y] + 1 == dist[x];
        if (closer) {
          chosen = k;
          break;
        }
      }
    }
    s.probs[chosen] = 1.0;
  }
  return s;
}

}  // namespace cmdp
