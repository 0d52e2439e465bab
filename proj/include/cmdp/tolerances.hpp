#pragma once

namespace cmdp {

/// Numerical thresholds shared across the solver. The CLI `--tol` flag
/// multiplies every entry by one factor.
struct Tolerances {
  double support = 1e-12;          // marginal / probability treated as zero
  double singular = 1e-12;         // smallest admissible LU pivot
  double flow = 1e-9;              // flow-balance residual
  double pivot = 1e-10;            // simplex pivot and feasibility
  double dedup = 1e-8;             // vertex and selector deduplication
  double decomposition = 1e-8;     // mixture objective and constraint slack
  double value_iteration = 1e-10;  // sup-norm stopping criterion

  Tolerances scaled(double factor) const {
    Tolerances t = *this;
    t.support *= factor;
    t.singular *= factor;
    t.flow *= factor;
    t.pivot *= factor;
    t.dedup *= factor;
    t.decomposition *= factor;
    t.value_iteration *= factor;
    return t;
  }
};

}  // namespace cmdp
