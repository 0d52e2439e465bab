#include "cmdp/model.hpp"

#include "cmdp/error.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cmdp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RowSumExceedsOne: return "RowSumExceedsOne";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::NegativeCost: return "NegativeCost";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownStateReference: return "UnknownStateReference";
    case ErrorCode::UnknownActionReference: return "UnknownActionReference";
    case ErrorCode::EmptyActionSet: return "EmptyActionSet";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::ActionNameClash: return "ActionNameClash";
    case ErrorCode::InvalidStrategy: return "InvalidStrategy";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InfeasibleProblem: return "InfeasibleProblem";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::InfiniteOccupation: return "InfiniteOccupation";
    case ErrorCode::UnboundedPolytope: return "UnboundedPolytope";
    case ErrorCode::TooManySelectors: return "TooManySelectors";
    case ErrorCode::EmptyCandidatePool: return "EmptyCandidatePool";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::RepairFailed: return "RepairFailed";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::UnboundedObjective: return "UnboundedObjective";
    case ErrorCode::NonConvergent: return "NonConvergent";
  }
  return "Unknown";
}

namespace {

constexpr double kRowSumSlack = 1e-12;
constexpr double kClampFloor = -1e-15;
constexpr double kAbsorptionFloor = 1e-12;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

void check_names(const std::vector<std::string>& names, const std::string& what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) fail(ErrorCode::ParseError, what + " name must be nonempty");
    if (n.find('/') != std::string::npos)
      fail(ErrorCode::ParseError, what + " name '" + n + "' must not contain '/'");
    if (!seen.insert(n).second) fail(ErrorCode::DuplicateName, "duplicate " + what + " '" + n + "'");
  }
}

}  // namespace

Index FiniteMdpModel::find_state(const std::string& name) const {
  for (Index x = 0; x < num_states(); ++x)
    if (state_names_[x] == name) return x;
  return -1;
}

Index FiniteMdpModel::find_action(Index x, const std::string& name) const {
  const auto& names = action_names_[x];
  for (std::size_t a = 0; a < names.size(); ++a)
    if (names[a] == name) return static_cast<Index>(a);
  return -1;
}

Eigen::VectorXd FiniteMdpModel::state_sum(const Eigen::VectorXd& pair_values) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_states());
  for (Index k = 0; k < num_pairs(); ++k) out[pair_state_[k]] += pair_values[k];
  return out;
}

FiniteMdpModel FiniteMdpModel::with_costs(Eigen::MatrixXd costs,
                                          std::vector<std::string> names) const {
  if (costs.cols() != num_pairs() || costs.rows() < 1 ||
      static_cast<Index>(names.size()) != costs.rows())
    fail(ErrorCode::ShapeMismatch, "cost table shape does not match the model");
  for (Index j = 0; j < costs.rows(); ++j)
    for (Index k = 0; k < costs.cols(); ++k) {
      if (!std::isfinite(costs(j, k))) fail(ErrorCode::NonFiniteValue, "cost is not finite");
      if (costs(j, k) < 0) fail(ErrorCode::NegativeCost, "cost '" + names[j] + "' is negative");
    }
  FiniteMdpModel out = *this;
  out.costs_ = std::move(costs);
  out.cost_names_ = std::move(names);
  return out;
}

FiniteMdpModel validate_model(const RawModel& raw) {
  FiniteMdpModel m;
  if (raw.states.empty()) fail(ErrorCode::EmptyActionSet, "model has no states");
  check_names(raw.states, "state");
  if (raw.actions.size() != raw.states.size())
    fail(ErrorCode::ShapeMismatch, "action lists do not match the state list");

  std::unordered_map<std::string, Index> state_index;
  for (std::size_t i = 0; i < raw.states.size(); ++i)
    state_index.emplace(raw.states[i], static_cast<Index>(i));

  m.state_names_ = raw.states;
  m.action_names_ = raw.actions;
  m.pair_offset_.assign(1, 0);
  for (std::size_t x = 0; x < raw.states.size(); ++x) {
    if (raw.actions[x].empty())
      fail(ErrorCode::EmptyActionSet, "state '" + raw.states[x] + "' has no actions");
    check_names(raw.actions[x], "action");
    for (std::size_t a = 0; a < raw.actions[x].size(); ++a)
      m.pair_state_.push_back(static_cast<Index>(x));
    m.pair_offset_.push_back(m.pair_offset_.back() + static_cast<Index>(raw.actions[x].size()));
  }

  auto it = state_index.find(raw.initial);
  if (it == state_index.end())
    fail(ErrorCode::UnknownStateReference, "initial state '" + raw.initial + "' is unknown");
  m.initial_ = it->second;

  auto resolve_pair = [&](const std::string& s, const std::string& a,
                          const std::string& ctx) -> Index {
    auto sit = state_index.find(s);
    if (sit == state_index.end())
      fail(ErrorCode::UnknownStateReference, ctx + ": unknown state '" + s + "'");
    Index ai = m.find_action(sit->second, a);
    if (ai < 0)
      fail(ErrorCode::UnknownActionReference,
           ctx + ": state '" + s + "' has no action '" + a + "'");
    return m.pair(sit->second, ai);
  };

  const Index n_states = m.num_states();
  const Index n_pairs = m.num_pairs();
  m.kernel_ = Eigen::MatrixXd::Zero(n_pairs, n_states);
  std::vector<bool> seen_row(static_cast<std::size_t>(n_pairs), false);
  for (const auto& t : raw.transitions) {
    const std::string ctx = "transition " + t.from + "/" + t.action;
    Index k = resolve_pair(t.from, t.action, ctx);
    if (seen_row[k]) fail(ErrorCode::DuplicateName, ctx + " is given twice");
    seen_row[k] = true;
    for (const auto& [to, prob] : t.to) {
      auto sit = state_index.find(to);
      if (sit == state_index.end())
        fail(ErrorCode::UnknownStateReference, ctx + ": unknown target state '" + to + "'");
      if (!std::isfinite(prob)) fail(ErrorCode::NonFiniteValue, ctx + ": probability is not finite");
      double v = prob;
      if (v < 0) {
        if (v < kClampFloor)
          fail(ErrorCode::NegativeProbability, ctx + ": negative probability");
        v = 0.0;
      }
      m.kernel_(k, sit->second) += v;
    }
  }

  m.absorption_.resize(n_pairs);
  for (Index k = 0; k < n_pairs; ++k) {
    double sum = m.kernel_.row(k).sum();
    if (sum > 1.0 + kRowSumSlack) {
      std::ostringstream os;
      os << "transition " << m.state_names_[m.pair_state_[k]] << "/"
         << m.action_names_[m.pair_state_[k]][m.action_of(k)] << ": row sums to " << sum;
      fail(ErrorCode::RowSumExceedsOne, os.str());
    }
    double deficit = 1.0 - sum;
    m.absorption_[k] = deficit < kAbsorptionFloor ? 0.0 : deficit;
  }

  if (raw.costs.empty()) fail(ErrorCode::ShapeMismatch, "model needs at least one cost table");
  m.costs_ = Eigen::MatrixXd::Zero(static_cast<Index>(raw.costs.size()), n_pairs);
  for (std::size_t j = 0; j < raw.costs.size(); ++j) {
    const auto& c = raw.costs[j];
    m.cost_names_.push_back(c.name);
    std::vector<bool> seen(static_cast<std::size_t>(n_pairs), false);
    for (const auto& e : c.entries) {
      const std::string ctx = "cost '" + c.name + "' entry " + e.state + "/" + e.action;
      Index k = resolve_pair(e.state, e.action, ctx);
      if (seen[k]) fail(ErrorCode::DuplicateName, ctx + " is given twice");
      seen[k] = true;
      if (!std::isfinite(e.value)) fail(ErrorCode::NonFiniteValue, ctx + " is not finite");
      if (e.value < 0) fail(ErrorCode::NegativeCost, ctx + " is negative");
      m.costs_(static_cast<Index>(j), k) = e.value;
    }
  }
  return m;
}

RawModel to_raw(const FiniteMdpModel& model) {
  RawModel raw;
  raw.states = model.state_names();
  for (Index x = 0; x < model.num_states(); ++x) raw.actions.push_back(model.action_names(x));
  raw.initial = model.state_name(model.initial());
  for (Index k = 0; k < model.num_pairs(); ++k) {
    Index x = model.state_of(k);
    RawTransition t{model.state_name(x), model.action_name(x, model.action_of(k)), {}};
    for (Index y = 0; y < model.num_states(); ++y)
      if (model.p(k, y) != 0.0) t.to.emplace_back(model.state_name(y), model.p(k, y));
    raw.transitions.push_back(std::move(t));
  }
  for (Index j = 0; j < model.num_costs(); ++j) {
    RawCost c{model.cost_name(j), {}};
    for (Index k = 0; k < model.num_pairs(); ++k) {
      if (model.cost(j, k) == 0.0) continue;
      Index x = model.state_of(k);
      c.entries.push_back({model.state_name(x), model.action_name(x, model.action_of(k)),
                           model.cost(j, k)});
    }
    raw.costs.push_back(std::move(c));
  }
  return raw;
}

FiniteMdpModel dense_model(const std::vector<Index>& action_counts, const Eigen::MatrixXd& kernel,
                           const Eigen::MatrixXd& costs, Index initial) {
  RawModel raw;
  const Index n_states = static_cast<Index>(action_counts.size());
  Index n_pairs = 0;
  for (Index c : action_counts) n_pairs += c;
  if (kernel.rows() != n_pairs || kernel.cols() != n_states || costs.cols() != n_pairs)
    fail(ErrorCode::ShapeMismatch, "dense model shapes are inconsistent");
  for (Index x = 0; x < n_states; ++x) {
    raw.states.push_back("s" + std::to_string(x));
    std::vector<std::string> acts;
    for (Index a = 0; a < action_counts[x]; ++a) acts.push_back("a" + std::to_string(a));
    raw.actions.push_back(std::move(acts));
  }
  if (initial < 0 || initial >= n_states)
    fail(ErrorCode::UnknownStateReference, "initial state index out of range");
  raw.initial = raw.states[initial];
  Index k = 0;
  for (Index x = 0; x < n_states; ++x)
    for (Index a = 0; a < action_counts[x]; ++a, ++k) {
      RawTransition t{raw.states[x], raw.actions[x][a], {}};
      for (Index y = 0; y < n_states; ++y)
        if (kernel(k, y) != 0.0) t.to.emplace_back(raw.states[y], kernel(k, y));
      raw.transitions.push_back(std::move(t));
    }
  for (Index j = 0; j < costs.rows(); ++j) {
    RawCost c{"r" + std::to_string(j), {}};
    k = 0;
    for (Index x = 0; x < n_states; ++x)
      for (Index a = 0; a < action_counts[x]; ++a, ++k)
        if (costs(j, k) != 0.0) c.entries.push_back({raw.states[x], raw.actions[x][a], costs(j, k)});
    raw.costs.push_back(std::move(c));
  }
  return validate_model(raw);
}

ConstrainedProblem make_problem(FiniteMdpModel model, Eigen::VectorXd bounds) {
  if (bounds.size() != model.num_constraints())
    fail(ErrorCode::ShapeMismatch, "bound count does not match the number of constraint costs");
  for (Index j = 0; j < bounds.size(); ++j)
    if (!std::isfinite(bounds[j])) fail(ErrorCode::NonFiniteValue, "constraint bound is not finite");
  return ConstrainedProblem{std::move(model), std::move(bounds)};
}

FiniteMdpModel make_stopping_mdp(const FiniteMdpModel& base, const Eigen::MatrixXd& stop_costs) {
  if (stop_costs.rows() != base.num_costs() || stop_costs.cols() != base.num_states())
    fail(ErrorCode::ShapeMismatch, "stop costs must be (costs x states)");
  RawModel raw = to_raw(base);
  for (Index x = 0; x < base.num_states(); ++x) {
    if (base.find_action(x, kStopAction) >= 0)
      fail(ErrorCode::ActionNameClash,
           "state '" + base.state_name(x) + "' already has an action named STOP");
    raw.actions[x].push_back(kStopAction);
    raw.transitions.push_back({base.state_name(x), kStopAction, {}});
    for (Index j = 0; j < base.num_costs(); ++j) {
      double c = stop_costs(j, x);
      if (c != 0.0) raw.costs[j].entries.push_back({base.state_name(x), kStopAction, c});
    }
  }
  return validate_model(raw);
}

FiniteMdpModel make_stopping_mdp(const FiniteMdpModel& base, const Eigen::VectorXd& stop_costs) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(base.num_costs(), base.num_states());
  if (stop_costs.size() != base.num_states())
    fail(ErrorCode::ShapeMismatch, "one stop cost per state is required");
  full.row(0) = stop_costs.transpose();
  return make_stopping_mdp(base, full);
}

void validate_strategy(const FiniteMdpModel& model, const StationaryStrategy& sigma) {
  if (sigma.probs.size() != model.num_pairs())
    fail(ErrorCode::ShapeMismatch, "strategy size does not match the model");
  for (Index x = 0; x < model.num_states(); ++x) {
    double sum = 0.0;
    for (Index k = model.pair_begin(x); k < model.pair_end(x); ++k) {
      if (!(sigma.probs[k] >= 0.0))
        fail(ErrorCode::InvalidStrategy, "negative probability at state '" + model.state_name(x) + "'");
      sum += sigma.probs[k];
    }
    if (std::abs(sum - 1.0) > 1e-12)
      fail(ErrorCode::InvalidStrategy, "row of state '" + model.state_name(x) + "' does not sum to 1");
  }
}

void validate_strategy(const FiniteMdpModel& model, const DeterministicStrategy& phi) {
  if (static_cast<Index>(phi.choice.size()) != model.num_states())
    fail(ErrorCode::ShapeMismatch, "selector size does not match the model");
  for (Index x = 0; x < model.num_states(); ++x)
    if (phi[x] < 0 || phi[x] >= model.num_actions(x))
      fail(ErrorCode::InvalidStrategy, "selector action out of range at '" + model.state_name(x) + "'");
}

void validate_strategy(const FiniteMdpModel& model, const MarkovStrategy& sigma) {
  for (const auto& h : sigma.head) validate_strategy(model, h);
  validate_strategy(model, sigma.tail);
}

void validate_strategy(const FiniteMdpModel& model, const MixedStrategy& mix) {
  if (mix.components.empty()) fail(ErrorCode::InvalidStrategy, "mixture has no components");
  double sum = 0.0;
  for (const auto& c : mix.components) {
    if (!(c.weight >= 0.0)) fail(ErrorCode::InvalidStrategy, "negative mixture weight");
    validate_strategy(model, c.selector);
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) fail(ErrorCode::InvalidStrategy, "mixture weights do not sum to 1");
}

StationaryStrategy as_stationary(const FiniteMdpModel& model, const DeterministicStrategy& phi) {
  StationaryStrategy s{Eigen::VectorXd::Zero(model.num_pairs())};
  for (Index x = 0; x < model.num_states(); ++x) s.probs[model.pair(x, phi[x])] = 1.0;
  return s;
}

DeterministicStrategy lowest_index_selector(const FiniteMdpModel& model) {
  return DeterministicStrategy{std::vector<Index>(static_cast<std::size_t>(model.num_states()), 0)};
}

StationaryStrategy uniform_strategy(const FiniteMdpModel& model) {
  StationaryStrategy s{Eigen::VectorXd(model.num_pairs())};
  for (Index k = 0; k < model.num_pairs(); ++k)
    s.probs[k] = 1.0 / static_cast<double>(model.num_actions(model.state_of(k)));
  return s;
}

}  // namespace cmdp
