#include "support_graph.hpp"

#include <algorithm>
#include <deque>

namespace cmdp::detail {

SupportGraph support_graph(const FiniteMdpModel& model, const Eigen::VectorXd& pair_weights) {
  const Index n = model.num_states();
  SupportGraph g;
  g.successors.resize(static_cast<std::size_t>(n));
  g.leaks.assign(static_cast<std::size_t>(n), false);
  for (Index x = 0; x < n; ++x) {
    std::vector<bool> hit(static_cast<std::size_t>(n), false);
    for (Index k = model.pair_begin(x); k < model.pair_end(x); ++k) {
      if (!(pair_weights[k] > 0.0)) continue;
      if (model.absorption()[k] > 0.0) g.leaks[x] = true;
      for (Index y = 0; y < n; ++y)
        if (model.p(k, y) > 0.0) hit[y] = true;
    }
    for (Index y = 0; y < n; ++y)
      if (hit[y]) g.successors[x].push_back(y);
  }
  return g;
}

std::vector<bool> forward_reachable(const SupportGraph& g, const std::vector<bool>& seeds) {
  std::vector<bool> seen = seeds;
  std::deque<Index> queue;
  for (Index x = 0; x < g.size(); ++x)
    if (seeds[x]) queue.push_back(x);
  while (!queue.empty()) {
    Index x = queue.front();
    queue.pop_front();
    for (Index y : g.successors[x])
      if (!seen[y]) {
        seen[y] = true;
        queue.push_back(y);
      }
  }
  return seen;
}

std::vector<bool> backward_reachable(const SupportGraph& g, const std::vector<bool>& targets) {
  std::vector<std::vector<Index>> pred(g.successors.size());
  for (Index x = 0; x < g.size(); ++x)
    for (Index y : g.successors[x]) pred[y].push_back(x);
  std::vector<bool> seen = targets;
  std::deque<Index> queue;
  for (Index x = 0; x < g.size(); ++x)
    if (targets[x]) queue.push_back(x);
  while (!queue.empty()) {
    Index y = queue.front();
    queue.pop_front();
    for (Index x : pred[y])
      if (!seen[x]) {
        seen[x] = true;
        queue.push_back(x);
      }
  }
  return seen;
}

namespace {

struct Tarjan {
  const std::vector<std::vector<Index>>& succ;
  const std::vector<bool>& alive;
  std::vector<Index> index, low, comp;
  std::vector<bool> on_stack;
  std::vector<Index> stack;
  Index counter = 0;
  Index components = 0;

  void visit(Index v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (Index w : succ[v]) {
      if (!alive[w]) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = components;
      } while (w != v);
      ++components;
    }
  }
};

}  // namespace

std::vector<Index> strongly_connected_components(const std::vector<std::vector<Index>>& successors,
                                                 const std::vector<bool>& alive,
                                                 Index* component_count) {
  const std::size_t n = successors.size();
  Tarjan t{successors, alive, std::vector<Index>(n, -1), std::vector<Index>(n, -1),
           std::vector<Index>(n, -1), std::vector<bool>(n, false), {}};
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v] && t.index[v] < 0) t.visit(static_cast<Index>(v));
  if (component_count) *component_count = t.components;
  return t.comp;
}

}  // namespace cmdp::detail
