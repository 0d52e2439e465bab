#pragma once

// Small named models used across the suites.

#include "cmdp/model.hpp"

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

using cmdp::RawModel;

struct Row {
  std::string from, action;
  std::vector<std::pair<std::string, double>> to;
};

inline RawModel raw(std::vector<std::string> states, std::vector<std::vector<std::string>> actions,
                    std::vector<Row> rows, std::vector<cmdp::RawCost> costs, std::string initial = "") {
  RawModel m;
  m.initial = initial.empty() ? states.front() : initial;
  m.states = std::move(states);
  m.actions = std::move(actions);
  for (auto& r : rows) m.transitions.push_back({r.from, r.action, r.to});
  m.costs = std::move(costs);
  return m;
}

/// One state, actions a and b, both absorbing at once; r0 = (0, 1), r1 = (1, 0).
inline cmdp::FiniteMdpModel twoact() {
  return cmdp::validate_model(raw({"s0"}, {{"a", "b"}}, {{"s0", "a", {}}, {"s0", "b", {}}},
                                  {{"r0", {{"s0", "b", 1.0}}}, {"r1", {{"s0", "a", 1.0}}}}));
}

inline cmdp::ConstrainedProblem twoact_problem(double d1 = 0.5) {
  return cmdp::make_problem(twoact(), Eigen::VectorXd::Constant(1, d1));
}

/// s0 -> s1 -> cemetery, one action each; costs r0 = (c0, c1).
inline cmdp::FiniteMdpModel chain2(double c0 = 1.0, double c1 = 3.0) {
  return cmdp::validate_model(raw({"s0", "s1"}, {{"a"}, {"a"}}, {{"s0", "a", {{"s1", 1.0}}}, {"s1", "a", {}}},
                                  {{"r0", {{"s0", "a", c0}, {"s1", "a", c1}}}}));
}

/// p(s0|s0,a) = q.
inline cmdp::FiniteMdpModel geometric(double q = 0.5) {
  return cmdp::validate_model(raw({"s0"}, {{"a"}}, {{"s0", "a", {{"s0", q}}}}, {{"r0", {{"s0", "a", 1.0}}}}));
}

/// p(s0|s0,a) = 1, cost r0(s0,a) = c.
inline cmdp::FiniteMdpModel loop(double c = 0.0) {
  return cmdp::validate_model(raw({"s0"}, {{"a"}}, {{"s0", "a", {{"s0", 1.0}}}}, {{"r0", {{"s0", "a", c}}}}));
}

/// s0: a stays with probability 0.5, b absorbs; r0 = (1, 2).
inline cmdp::FiniteMdpModel loop_or_stop() {
  return cmdp::validate_model(raw({"s0"}, {{"a", "b"}}, {{"s0", "a", {{"s0", 0.5}}}, {"s0", "b", {}}},
                                  {{"r0", {{"s0", "a", 1.0}, {"s0", "b", 2.0}}}}));
}

/// s0: a stays forever (cost 0 in every criterion), b absorbs with cost 1.
inline cmdp::FiniteMdpModel zeroloop() {
  return cmdp::validate_model(raw({"s0"}, {{"a", "b"}}, {{"s0", "a", {{"s0", 1.0}}}, {"s0", "b", {}}},
                                  {{"r0", {{"s0", "b", 1.0}}}}));
}

}  // namespace fixtures
