#pragma once

#include "cmdp/model.hpp"
#include "cmdp/tolerances.hpp"

#include <optional>
#include <vector>

namespace cmdp {

/// (R_0, ..., R_J): cost integrals of an occupation measure.
using ObjectiveVector = Eigen::VectorXd;

/// Expected state-action visit counts, flat over pairs.
struct OccupationMeasure {
  Eigen::VectorXd values;

  double operator()(Index pair) const { return values[pair]; }
  double total_mass() const { return values.sum(); }
};

/// State marginal mu(x) = sum_a M[x][a].
inline Eigen::VectorXd marginal(const FiniteMdpModel& model, const OccupationMeasure& m) {
  return model.state_sum(m.values);
}

enum class Finiteness { Finite, Infinite };

struct FinitenessReport {
  Finiteness verdict = Finiteness::Finite;
  /// Infinite only: a reachable closed class with no absorption leak, sorted.
  std::vector<Index> witness;
  /// Finite only: P^n(X) for n = 0..horizon, the mass still alive after n steps.
  Eigen::VectorXd survival;
  /// States reachable from the initial support under the strategy.
  std::vector<bool> reachable;

  bool finite() const { return verdict == Finiteness::Finite; }
};

inline constexpr Index kSurvivalHorizon = 64;

/// Exact support-graph test: finite iff every reachable state can reach a
/// leaking state.
FinitenessReport classify_finiteness(const FiniteMdpModel& model, const StationaryStrategy& sigma,
                                     Index horizon = kSurvivalHorizon);

/// Same test started from an arbitrary initial distribution over X.
FinitenessReport classify_finiteness_from(const FiniteMdpModel& model,
                                          const StationaryStrategy& sigma,
                                          const Eigen::VectorXd& initial,
                                          Index horizon = kSurvivalHorizon);

/// Either a finite occupation measure or the infinite verdict with witness.
struct OccupationResult {
  FinitenessReport finiteness;
  std::optional<OccupationMeasure> measure;

  bool finite() const { return measure.has_value(); }
  /// Throws Error(InfiniteOccupation) when infinite.
  const OccupationMeasure& value() const;
};

/// Minimal solution of the stationary balance equation, split by sigma.
OccupationResult occupation_of_stationary(const FiniteMdpModel& model,
                                          const StationaryStrategy& sigma,
                                          const Tolerances& tol = {});

/// Occupation measure of sigma started from the distribution `initial` (by
/// linearity, sum_x initial(x) M^sigma_x).
OccupationResult occupation_from_distribution(const FiniteMdpModel& model,
                                              const StationaryStrategy& sigma,
                                              const Eigen::VectorXd& initial,
                                              const Tolerances& tol = {});

/// max_x | mu(x) - delta_{x0}(x) - sum_{y,a} p(x|y,a) M[y][a] |.
double flow_residual(const FiniteMdpModel& model, const OccupationMeasure& m);

/// sigma(a|x) = M[x][a] / mu(x), or a Dirac at fallback(x) where mu(x) is
/// below tol.support.
StationaryStrategy induced_strategy(const FiniteMdpModel& model, const OccupationMeasure& m,
                                    const DeterministicStrategy& fallback,
                                    const Tolerances& tol = {});

/// Recomputes the occupation of the induced strategy, removing excess mass
/// that a flow-feasible table may carry on closed zero-leak classes.
/// Throws Error(RepairFailed) if the induced strategy is not absorbing.
OccupationMeasure minimality_repair(const FiniteMdpModel& model, const OccupationMeasure& m,
                                    const Tolerances& tol = {});

struct ValueFunction {
  Eigen::VectorXd values;    // v(x), zero off the reachable set
  std::vector<bool> defined; // reachable from x0 under the strategy
};

/// Solves v = f + P_sigma v on the states reachable from x0.
/// Throws Error(InfiniteOccupation) if sigma is not absorbing from x0.
ValueFunction evaluate_value(const FiniteMdpModel& model, const StationaryStrategy& sigma,
                             const Eigen::VectorXd& f, const Tolerances& tol = {});

/// max over defined states of |v - f - P_sigma v|.
double value_equation_residual(const FiniteMdpModel& model, const StationaryStrategy& sigma,
                               const Eigen::VectorXd& f, const Eigen::VectorXd& v,
                               const std::vector<bool>& defined);

/// Head by forward recursion, stationary tail in closed form.
OccupationResult occupation_of_markov(const FiniteMdpModel& model, const MarkovStrategy& sigma,
                                      const Tolerances& tol = {});

/// P(X_{n-1} = x, A_n = a) for n = 1..steps, one pair vector per step.
std::vector<Eigen::VectorXd> step_marginals(const FiniteMdpModel& model,
                                            const MarkovStrategy& sigma, Index steps);

/// Same marginals for a mixture: sum_l alpha_l P^{phi_l}(X_{n-1} = x) I{phi_l(x) = a}.
std::vector<Eigen::VectorXd> step_marginals(const FiniteMdpModel& model, const MixedStrategy& mix,
                                            Index steps);

/// Markov strategy with the same step-wise state-action marginals as the
/// mixture for steps 1..horizon. The tail is the strategy induced by the
/// mixture's occupation after the horizon, so the total occupation matches
/// the mixture exactly as well. States with no mass use the prior weights.
MarkovStrategy markovize_mixture(const FiniteMdpModel& model, const MixedStrategy& mix,
                                 Index horizon, const Tolerances& tol = {});

/// sum_l alpha_l M^{phi_l}. Throws Error(InfiniteOccupation) if a component is
/// not absorbing.
OccupationMeasure mixture_occupation(const FiniteMdpModel& model, const MixedStrategy& mix,
                                     const Tolerances& tol = {});

/// R_j = sum_{x,a} r_j(x,a) M[x][a], j = 0..J.
inline ObjectiveVector cost_vector(const FiniteMdpModel& model, const OccupationMeasure& m) {
  return model.costs() * m.values;
}

/// P_sigma(x, y) = sum_a sigma(a|x) p(y|x,a), dense (states x states).
Eigen::MatrixXd transition_matrix(const FiniteMdpModel& model, const StationaryStrategy& sigma);

}  // namespace cmdp
