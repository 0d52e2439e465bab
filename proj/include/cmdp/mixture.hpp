#pragma once

#include "cmdp/error.hpp"
#include "cmdp/lp.hpp"
#include "cmdp/model.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/tolerances.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace cmdp {

struct ExtremalityVerdict {
  bool extreme = true;
  std::optional<Index> witness;  // lowest-index state that randomizes
};

/// Extreme in the finite occupation measures iff the induced kernel is a
/// Dirac at every state carrying mass above `tol`.
ExtremalityVerdict is_extreme(const FiniteMdpModel& model, const OccupationMeasure& m,
                              double tol = 1e-9);

/// Selector with the largest M[x][a] at every charged state (lowest index on
/// ties) and action 0 elsewhere.
DeterministicStrategy argmax_selector(const FiniteMdpModel& model, const OccupationMeasure& m,
                                      double tol = 1e-9);

inline constexpr double kSelectorGuard = 1e6;

/// prod_x |A(x)|, saturating at infinity.
double selector_count(const FiniteMdpModel& model);

struct SelectorEvaluation {
  DeterministicStrategy selector;
  FinitenessReport finiteness;
  std::optional<OccupationMeasure> occupation;
  std::optional<ObjectiveVector> objective;
};

/// Visits every selector in lexicographic order (state 0 most significant).
/// Throws Error(TooManySelectors) above kSelectorGuard.
void for_each_deterministic(const FiniteMdpModel& model,
                            const std::function<void(const SelectorEvaluation&)>& visit,
                            const Tolerances& tol = {});

std::vector<SelectorEvaluation> enumerate_deterministic(const FiniteMdpModel& model,
                                                        const Tolerances& tol = {});

/// Deterministic minimiser of the weighted cost sum_j weights_j r_j, from
/// value iteration followed by exact policy-improvement polishing.
/// Throws Error(NonConvergent) if the sweep cap is hit.
DeterministicStrategy solve_unconstrained(const FiniteMdpModel& model,
                                          const Eigen::VectorXd& weights,
                                          const Tolerances& tol = {});

/// Maximal end components among the pairs allowed by `mask` (pair-indexed,
/// nonzero = allowed). A pair belongs to an end component only if all of its
/// mass stays inside the component. Each component is a sorted pair list;
/// components are ordered by their lowest state.
std::vector<std::vector<Index>> maximal_end_components(const FiniteMdpModel& model,
                                                       const Eigen::VectorXd& mask);

struct AssumptionCheck {
  bool holds = true;
  std::vector<Index> witness;  // pairs of a reachable all-zero-cost end component
};

/// Holds iff no end component made of pairs with r_j = 0 for every j is
/// reachable from the initial state.
AssumptionCheck check_penalization_assumption(const FiniteMdpModel& model);
AssumptionCheck check_penalization_assumption(const ConstrainedProblem& problem);

/// Strategy that heads for the witness component and then randomizes
/// uniformly over its pairs forever.
StationaryStrategy stay_forever_strategy(const FiniteMdpModel& model,
                                         const std::vector<Index>& witness_pairs);

class AssumptionViolatedError : public Error {
public:
  AssumptionViolatedError(std::vector<Index> witness, const std::string& what)
      : Error(ErrorCode::AssumptionViolated, what), witness_(std::move(witness)) {}

  const std::vector<Index>& witness() const { return witness_; }

private:
  std::vector<Index> witness_;
};

struct DecompositionResult {
  MixedStrategy mixture;
  ObjectiveVector achieved;
  std::vector<ObjectiveVector> component_objectives;
  Index cardinality = 0;
  bool fallback = false;
  Index pool_size = 0;
};

/// Reduces a convex combination of points (columns of `points`) to at most
/// rows + 1 nonzero weights with the same weighted sum.
Eigen::VectorXd caratheodory_reduce(const Eigen::MatrixXd& points, Eigen::VectorXd weights,
                                    double zero_tol = 1e-14);

/// Weight vectors used for Lagrangian column generation: every 0/1 vector
/// followed by `extra` points of a Halton sequence mapped onto the simplex.
std::vector<Eigen::VectorXd> lagrangian_weight_grid(Index dimension, Index extra = 20,
                                                    Index offset = 0);

/// Writes Mstar's objective vector as a mixture of deterministic stationary
/// strategies with at most J+1 components.
DecompositionResult decompose_to_mixture(const ConstrainedProblem& problem,
                                         const OccupationMeasure& mstar,
                                         const Tolerances& tol = {});

struct SolveOptions {
  bool check_assumption = true;
  Tolerances tol;
};

struct ConstrainedSolution {
  OccupationMeasure occupation;  // repaired LP optimum
  DecompositionResult decomposition;
  ObjectiveVector objective;     // cost vector of `occupation`
  Index lp_iterations = 0;
};

/// Assumption gate, occupation LP, minimality repair, decomposition.
/// Throws AssumptionViolatedError or Error(InfeasibleProblem).
ConstrainedSolution solve_constrained(const ConstrainedProblem& problem,
                                      const SolveOptions& options = {});

/// Minimises r_1 under constraints 2..J and accepts the result when
/// R_1 <= d_1. Objective vectors are reported in the original indexing.
ConstrainedSolution find_feasible(const ConstrainedProblem& problem,
                                  const SolveOptions& options = {});

}  // namespace cmdp
