#pragma once

#include "cmdp/model.hpp"
#include "cmdp/simplex.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cmdp {

using StandardFormLp = LinearProgram<double>;
using OccupationLpSolution = LpSolution<double>;

/// Occupation-measure LP of a constrained problem. Columns are state-action
/// pairs in model order; one flow-balance equality per state; one <= row per
/// constraint cost; objective r_0.
StandardFormLp build_occupation_lp(const ConstrainedProblem& problem);

struct VertexEnumeration {
  std::vector<Eigen::VectorXd> vertices;  // in basis-discovery order
  bool truncated = false;
  Index bases_examined = 0;
};

/// All basic feasible solutions of {x >= 0 : A_eq x = b_eq}, deduplicated in
/// sup-norm at `dedup`. `limit` caps the number of candidate bases examined;
/// hitting it sets `truncated`. Requires an LP without inequality rows.
/// Throws Error(UnboundedPolytope) when the feasible region is unbounded.
VertexEnumeration enumerate_vertices(const StandardFormLp& lp, Index limit = 1000000,
                                     double dedup = 1e-8);

/// Writes the LP in fixed-column MPS layout. Column and row labels are
/// listed in leading comment lines.
void write_mps(std::ostream& os, const StandardFormLp& lp, const std::string& name = "CMDP");

}  // namespace cmdp
