#pragma once

#include "cmdp/model.hpp"
#include "cmdp/occupancy.hpp"

#include <cstdint>
#include <map>
#include <variant>

namespace cmdp {

using SimStrategy = std::variant<DeterministicStrategy, StationaryStrategy, MarkovStrategy, MixedStrategy>;

struct SimulationOptions {
  Index trajectories = 100000;
  std::uint64_t seed = 42;
  Index step_cap = 10000;
  unsigned threads = 1;
};

struct SimulationReport {
  Index trajectories = 0;
  Eigen::VectorXd occupation;     // mean visits per state-action pair
  Eigen::VectorXd occupation_se;  // standard error of the mean
  Eigen::VectorXd marginal;       // mean visits per state
  Eigen::VectorXd marginal_se;
  Eigen::VectorXd cost_mean;      // mean accumulated r_j per trajectory
  Eigen::VectorXd cost_se;
  std::map<Index, Index> absorption_times;  // steps until absorption -> count
  Index capped = 0;                         // trajectories stopped by the step cap
};

/// Samples independent trajectories from the initial state. Trajectory i
/// draws from its own generator seeded by (seed, i), and partial sums are
/// combined in a fixed tree order, so the report does not depend on the
/// thread count.
SimulationReport simulate(const FiniteMdpModel& model, const SimStrategy& strategy,
                          const SimulationOptions& options);

/// Report whose estimates are the given measure with zero standard errors.
SimulationReport report_from_measure(const FiniteMdpModel& model, const OccupationMeasure& m);

/// Largest |empirical - analytic| / standard error over the pair table.
/// Entries with zero standard error must agree within 1e-12 (else +inf).
/// Throws Error(ShapeMismatch) if the sizes differ.
double compare_empirical(const SimulationReport& report, const OccupationMeasure& m);

}  // namespace cmdp
