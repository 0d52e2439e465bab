#include "cmdp/lp.hpp"

#include "cmdp/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace cmdp {

StandardFormLp build_occupation_lp(const ConstrainedProblem& problem) {
  const auto& model = problem.model;
  const Index n = model.num_pairs();
  const Index m = model.num_states();
  StandardFormLp lp;
  lp.objective = model.costs().row(0).transpose();

  lp.eq_matrix = -model.kernel().transpose();
  for (Index k = 0; k < n; ++k) lp.eq_matrix(model.state_of(k), k) += 1.0;
  lp.eq_rhs = Eigen::VectorXd::Zero(m);
  lp.eq_rhs[model.initial()] = 1.0;

  const Index j_count = problem.num_constraints();
  lp.ub_matrix = model.costs().bottomRows(j_count);
  lp.ub_rhs = problem.bounds;

  for (Index k = 0; k < n; ++k) {
    Index x = model.state_of(k);
    lp.column_labels.push_back(model.state_name(x) + "/" + model.action_name(x, model.action_of(k)));
  }
  for (Index x = 0; x < m; ++x) lp.eq_labels.push_back("flow:" + model.state_name(x));
  for (Index j = 1; j <= j_count; ++j) lp.ub_labels.push_back("constraint:" + model.cost_name(j));
  return lp;
}

namespace {

/// Advances `comb` to the next k-combination of {0..n-1}; false when done.
bool next_combination(std::vector<Index>& comb, Index n) {
  const Index k = static_cast<Index>(comb.size());
  for (Index i = k - 1; i >= 0; --i) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (Index j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

VertexEnumeration enumerate_vertices(const StandardFormLp& lp, Index limit, double dedup) {
  if (lp.num_ub() > 0)
    throw Error(ErrorCode::InvalidArgument, "vertex enumeration needs a pure flow polytope (J = 0)");
  const Index n = lp.num_columns();

  // Boundedness: maximise the total mass.
  StandardFormLp probe = lp;
  probe.objective = -Eigen::VectorXd::Ones(n);
  auto bound = simplex_solve(probe);
  VertexEnumeration out;
  if (bound.status == LpStatus::Infeasible) return out;
  if (bound.status == LpStatus::Unbounded)
    throw Error(ErrorCode::UnboundedPolytope,
                "flow polytope is unbounded (a closed class without absorption exists)");

  // Independent rows only.
  Eigen::FullPivLU<Eigen::MatrixXd> row_lu(lp.eq_matrix.transpose());
  const Index rank = row_lu.rank();
  std::vector<Index> rows;
  {
    // Greedy selection of independent rows in index order.
    Eigen::MatrixXd picked(0, n);
    for (Index i = 0; i < lp.num_eq() && static_cast<Index>(rows.size()) < rank; ++i) {
      Eigen::MatrixXd trial(picked.rows() + 1, n);
      trial << picked, lp.eq_matrix.row(i);
      if (Eigen::FullPivLU<Eigen::MatrixXd>(trial).rank() == trial.rows()) {
        picked = trial;
        rows.push_back(i);
      }
    }
  }
  Eigen::MatrixXd a(rank, n);
  Eigen::VectorXd b(rank);
  for (Index i = 0; i < rank; ++i) {
    a.row(i) = lp.eq_matrix.row(rows[i]);
    b[i] = lp.eq_rhs[rows[i]];
  }

  if (rank == 0) {
    out.vertices.push_back(Eigen::VectorXd::Zero(n));
    return out;
  }
  std::vector<Index> comb(static_cast<std::size_t>(rank));
  std::iota(comb.begin(), comb.end(), Index{0});
  do {
    if (out.bases_examined >= limit) {
      out.truncated = true;
      break;
    }
    ++out.bases_examined;
    Eigen::MatrixXd basis(rank, rank);
    for (Index c = 0; c < rank; ++c) basis.col(c) = a.col(comb[c]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd xb = lu.solve(b);
    if ((basis * xb - b).cwiseAbs().maxCoeff() > 1e-9) continue;
    if (xb.minCoeff() < -1e-10) continue;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Index c = 0; c < rank; ++c) x[comb[c]] = std::max(0.0, xb[c]);
    bool duplicate = std::any_of(out.vertices.begin(), out.vertices.end(), [&](const auto& v) {
      return (v - x).cwiseAbs().maxCoeff() <= dedup;
    });
    if (!duplicate) out.vertices.push_back(std::move(x));
  } while (next_combination(comb, n));
  return out;
}

namespace {

/// Shortest %g rendering that still fits the 12-character numeric field.
std::string fixed_number(double v) {
  char buf[32];
  for (int precision = 12; precision > 1; --precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::char_traits<char>::length(buf) <= 12) break;
  }
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

/// Data line: field 1 at column 2, field 2 at 5, 3 at 15, 4 at 25, 5 at 40, 6 at 50.
std::string mps_line(const std::string& f1, const std::string& f2, const std::string& f3,
                     const std::string& f4, const std::string& f5 = "",
                     const std::string& f6 = "") {
  std::string line = " " + pad(f1, 2) + " " + pad(f2, 8) + "  " + pad(f3, 8) + "  " + pad(f4, 12);
  if (!f5.empty()) line += "   " + pad(f5, 8) + "  " + f6;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

std::string code(char prefix, Index i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07ld", prefix, static_cast<long>(i + 1));
  return buf;
}

}  // namespace

void write_mps(std::ostream& os, const StandardFormLp& lp, const std::string& name) {
  const Index n = lp.num_columns();
  os << "* columns\n";
  for (Index k = 0; k < n; ++k)
    os << "*   " << code('X', k) << " "
       << (k < static_cast<Index>(lp.column_labels.size()) ? lp.column_labels[k] : "") << '\n';
  os << "* rows\n";
  for (Index i = 0; i < lp.num_eq(); ++i)
    os << "*   " << code('E', i) << " "
       << (i < static_cast<Index>(lp.eq_labels.size()) ? lp.eq_labels[i] : "") << '\n';
  for (Index i = 0; i < lp.num_ub(); ++i)
    os << "*   " << code('L', i) << " "
       << (i < static_cast<Index>(lp.ub_labels.size()) ? lp.ub_labels[i] : "") << '\n';

  os << "NAME          " << name << '\n';
  os << "ROWS\n";
  os << mps_line("N", "COST", "", "") << '\n';
  for (Index i = 0; i < lp.num_eq(); ++i) os << mps_line("E", code('E', i), "", "") << '\n';
  for (Index i = 0; i < lp.num_ub(); ++i) os << mps_line("L", code('L', i), "", "") << '\n';

  os << "COLUMNS\n";
  for (Index k = 0; k < n; ++k) {
    std::vector<std::pair<std::string, double>> entries;
    if (lp.objective[k] != 0.0) entries.emplace_back("COST", lp.objective[k]);
    for (Index i = 0; i < lp.num_eq(); ++i)
      if (lp.eq_matrix(i, k) != 0.0) entries.emplace_back(code('E', i), lp.eq_matrix(i, k));
    for (Index i = 0; i < lp.num_ub(); ++i)
      if (lp.ub_matrix(i, k) != 0.0) entries.emplace_back(code('L', i), lp.ub_matrix(i, k));
    if (entries.empty()) entries.emplace_back("COST", 0.0);
    for (std::size_t e = 0; e < entries.size(); e += 2) {
      if (e + 1 < entries.size())
        os << mps_line("", code('X', k), entries[e].first, fixed_number(entries[e].second),
                       entries[e + 1].first, fixed_number(entries[e + 1].second))
           << '\n';
      else
        os << mps_line("", code('X', k), entries[e].first, fixed_number(entries[e].second)) << '\n';
    }
  }

  os << "RHS\n";
  std::vector<std::pair<std::string, double>> rhs;
  for (Index i = 0; i < lp.num_eq(); ++i)
    if (lp.eq_rhs[i] != 0.0) rhs.emplace_back(code('E', i), lp.eq_rhs[i]);
  for (Index i = 0; i < lp.num_ub(); ++i)
    if (lp.ub_rhs[i] != 0.0) rhs.emplace_back(code('L', i), lp.ub_rhs[i]);
  for (std::size_t e = 0; e < rhs.size(); e += 2) {
    if (e + 1 < rhs.size())
      os << mps_line("", "RHS", rhs[e].first, fixed_number(rhs[e].second), rhs[e + 1].first,
                     fixed_number(rhs[e + 1].second))
         << '\n';
    else
      os << mps_line("", "RHS", rhs[e].first, fixed_number(rhs[e].second)) << '\n';
  }
  os << "ENDATA\n";
}

}  // namespace cmdp
