#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cmdp {

using Index = Eigen::Index;

/// Unvalidated model description, as produced by a parser or a generator.
/// Names are resolved and checked by validate_model().
struct RawTransition {
  std::string from;
  std::string action;
  std::vector<std::pair<std::string, double>> to;
};

struct RawCostEntry {
  std::string state;
  std::string action;
  double value = 0.0;
};

struct RawCost {
  std::string name;
  std::vector<RawCostEntry> entries;  // missing entries are 0
};

struct RawModel {
  std::vector<std::string> states;
  std::vector<std::vector<std::string>> actions;  // one list per state
  std::string initial;
  std::vector<RawTransition> transitions;  // missing (state, action) rows absorb at once
  std::vector<RawCost> costs;              // J+1 tables, objective first
};

/// Finite MDP with an implicit costless cemetery.
///
/// State-action pairs are numbered consecutively: the pairs of state x occupy
/// [pair_begin(x), pair_end(x)) in action order. The kernel is stored densely
/// as a (pairs x states) matrix; row k holds p(.|x,a) over the live states and
/// the missing mass 1 - sum_y p(y|x,a) is the absorption probability.
/// Instances are immutable once validated.
class FiniteMdpModel {
public:
  Index num_states() const { return static_cast<Index>(state_names_.size()); }
  Index num_pairs() const { return static_cast<Index>(pair_state_.size()); }
  Index num_costs() const { return costs_.rows(); }
  Index num_constraints() const { return costs_.rows() - 1; }
  Index num_actions(Index x) const { return pair_offset_[x + 1] - pair_offset_[x]; }

  Index pair_begin(Index x) const { return pair_offset_[x]; }
  Index pair_end(Index x) const { return pair_offset_[x + 1]; }
  Index pair(Index x, Index a) const { return pair_offset_[x] + a; }
  Index state_of(Index k) const { return pair_state_[k]; }
  Index action_of(Index k) const { return k - pair_offset_[pair_state_[k]]; }

  Index initial() const { return initial_; }

  const std::string& state_name(Index x) const { return state_names_[x]; }
  const std::string& action_name(Index x, Index a) const { return action_names_[x][a]; }
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& action_names(Index x) const { return action_names_[x]; }
  const std::string& cost_name(Index j) const { return cost_names_[j]; }
  const std::vector<std::string>& cost_names() const { return cost_names_; }

  /// Returns -1 when the name is unknown.
  Index find_state(const std::string& name) const;
  Index find_action(Index x, const std::string& name) const;

  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const Eigen::VectorXd& absorption() const { return absorption_; }
  const Eigen::MatrixXd& costs() const { return costs_; }

  double p(Index k, Index y) const { return kernel_(k, y); }
  double cost(Index j, Index k) const { return costs_(j, k); }

  /// Sums a pair-indexed vector over actions, giving a state-indexed vector.
  Eigen::VectorXd state_sum(const Eigen::VectorXd& pair_values) const;

  /// Same model with the cost tables replaced (rows = J+1, cols = pairs).
  FiniteMdpModel with_costs(Eigen::MatrixXd costs, std::vector<std::string> names) const;

private:
  friend FiniteMdpModel validate_model(const RawModel& raw);

  std::vector<std::string> state_names_;
  std::vector<std::vector<std::string>> action_names_;
  std::vector<std::string> cost_names_;
  std::vector<Index> pair_offset_;
  std::vector<Index> pair_state_;
  Eigen::MatrixXd kernel_;
  Eigen::VectorXd absorption_;
  Eigen::MatrixXd costs_;
  Index initial_ = 0;
};

/// Checks a raw description and builds the model. Kernel entries in
/// [-1e-15, 0) are clamped to 0; absorption below 1e-12 is treated as 0.
FiniteMdpModel validate_model(const RawModel& raw);

/// Converts a validated model back to raw form (canonical ordering).
RawModel to_raw(const FiniteMdpModel& model);

/// Convenience constructor for generated models: states are named s0, s1, ...
/// and the actions of every state a0, a1, ... . `kernel` is (pairs x states),
/// `costs` is (J+1 x pairs).
FiniteMdpModel dense_model(const std::vector<Index>& action_counts,
                           const Eigen::MatrixXd& kernel,
                           const Eigen::MatrixXd& costs, Index initial = 0);

struct ConstrainedProblem {
  FiniteMdpModel model;
  Eigen::VectorXd bounds;  // d_1..d_J

  Index num_constraints() const { return bounds.size(); }
};

/// Throws unless bounds are finite and match the model's cost count.
ConstrainedProblem make_problem(FiniteMdpModel model, Eigen::VectorXd bounds);

inline constexpr const char* kStopAction = "STOP";

/// Adds a STOP action (absorbs with probability 1) as the last action of every
/// state. `stop_costs` is (J+1 x states); row j holds r_j(x, STOP).
FiniteMdpModel make_stopping_mdp(const FiniteMdpModel& base,
                                 const Eigen::MatrixXd& stop_costs);

/// Stop costs on r_0 only; all other cost rows get 0 at STOP.
FiniteMdpModel make_stopping_mdp(const FiniteMdpModel& base,
                                 const Eigen::VectorXd& stop_costs);

// ---------------------------------------------------------------------------
// Strategies

/// sigma(a|x) stored flat over state-action pairs.
struct StationaryStrategy {
  Eigen::VectorXd probs;

  double operator()(Index pair) const { return probs[pair]; }
};

/// One action index per state.
struct DeterministicStrategy {
  std::vector<Index> choice;

  Index operator[](Index x) const { return choice[static_cast<std::size_t>(x)]; }
  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;
  friend auto operator<=>(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

/// Eventually stationary Markov strategy: head[n-1] acts at step n <= H,
/// tail at every later step.
struct MarkovStrategy {
  std::vector<StationaryStrategy> head;
  StationaryStrategy tail;

  /// Kernel applied at step n (1-based).
  const StationaryStrategy& at_step(std::size_t n) const {
    return n <= head.size() ? head[n - 1] : tail;
  }
};

struct MixtureComponent {
  double weight = 0.0;
  DeterministicStrategy selector;
};

struct MixedStrategy {
  std::vector<MixtureComponent> components;
};

/// Row sums 1 within 1e-12, entries >= 0.
void validate_strategy(const FiniteMdpModel& model, const StationaryStrategy& sigma);
void validate_strategy(const FiniteMdpModel& model, const DeterministicStrategy& phi);
void validate_strategy(const FiniteMdpModel& model, const MarkovStrategy& sigma);
void validate_strategy(const FiniteMdpModel& model, const MixedStrategy& mix);

StationaryStrategy as_stationary(const FiniteMdpModel& model, const DeterministicStrategy& phi);

/// Selector that picks action 0 everywhere.
DeterministicStrategy lowest_index_selector(const FiniteMdpModel& model);

/// Uniform randomization over every state's actions.
StationaryStrategy uniform_strategy(const FiniteMdpModel& model);

}  // namespace cmdp
