#pragma once

#include "cmdp/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace cmdp {

/// min c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
template <typename Scalar>
struct LinearProgram {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ub_matrix;
  Vector ub_rhs;
  std::vector<std::string> column_labels;
  std::vector<std::string> eq_labels;
  std::vector<std::string> ub_labels;

  Eigen::Index num_columns() const { return objective.size(); }
  Eigen::Index num_eq() const { return eq_matrix.rows(); }
  Eigen::Index num_ub() const { return ub_matrix.rows(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LpStatus status = LpStatus::Infeasible;
  Vector values;      // structural columns only
  Scalar objective{};
  /// Basic columns; indices >= num_columns() denote inequality slacks.
  std::vector<Eigen::Index> basis;
  Eigen::Index iterations = 0;
};

struct SimplexOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  Eigen::Index iteration_limit = 1000000;
};

namespace detail {

/// Dense tableau for the two-phase method. Column layout:
/// [structural | slacks | artificials | rhs].
template <typename Scalar>
class SimplexTableau {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Index = Eigen::Index;

  SimplexTableau(const LinearProgram<Scalar>& lp, const SimplexOptions& opt)
      : opt_(opt), n_(lp.num_columns()), m_eq_(lp.num_eq()), m_ub_(lp.num_ub()) {
    const Index m = m_eq_ + m_ub_;
    // Rows needing an artificial: every equality row and every <= row with
    // negative rhs (its slack enters with coefficient -1 after flipping).
    std::vector<bool> needs_art(static_cast<std::size_t>(m), true);
    for (Index i = 0; i < m_ub_; ++i) needs_art[m_eq_ + i] = lp.ub_rhs[i] < Scalar(0);
    n_art_ = 0;
    for (bool b : needs_art) n_art_ += b ? 1 : 0;

    width_ = n_ + m_ub_ + n_art_;
    t_ = Matrix::Zero(m + 1, width_ + 1);
    basis_.assign(static_cast<std::size_t>(m), -1);
    Index art = 0;
    for (Index i = 0; i < m; ++i) {
      const bool is_eq = i < m_eq_;
      Scalar rhs = is_eq ? lp.eq_rhs[i] : lp.ub_rhs[i - m_eq_];
      Scalar sign = rhs < Scalar(0) ? Scalar(-1) : Scalar(1);
      t_.row(i).head(n_) = sign * (is_eq ? lp.eq_matrix.row(i) : lp.ub_matrix.row(i - m_eq_));
      if (!is_eq) t_(i, n_ + (i - m_eq_)) = sign;
      t_(i, width_) = sign * rhs;
      if (needs_art[i]) {
        t_(i, n_ + m_ub_ + art) = Scalar(1);
        basis_[i] = n_ + m_ub_ + art;
        ++art;
      } else {
        basis_[i] = n_ + (i - m_eq_);
      }
    }
    original_ = t_.topRows(m);
    active_.assign(static_cast<std::size_t>(m), true);
  }

  LpSolution<Scalar> solve(const Vector& cost) {
    LpSolution<Scalar> out;
    const Index m = m_eq_ + m_ub_;
    if (n_art_ > 0) {
      Vector phase1 = Vector::Zero(width_);
      phase1.segment(n_ + m_ub_, n_art_).setOnes();
      set_objective(phase1);
      run(/*allow_artificial=*/true, out.iterations);
      if (-t_(m, width_) > Scalar(opt_.feasibility_tolerance) * (Scalar(1) + rhs_scale())) {
        out.status = LpStatus::Infeasible;
        return out;
      }
      drive_out_artificials();
    }
    Vector phase2 = Vector::Zero(width_);
    phase2.head(n_) = cost;
    set_objective(phase2);
    if (!run(/*allow_artificial=*/false, out.iterations)) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.status = LpStatus::Optimal;
    out.values = basic_solution();
    out.objective = cost.dot(out.values);
    for (Index i = 0; i < m; ++i)
      if (active_[i]) out.basis.push_back(basis_[i]);
    return out;
  }

private:
  Scalar rhs_scale() const {
    Scalar s(0);
    for (Index i = 0; i < static_cast<Index>(basis_.size()); ++i) s = std::max(s, abs_(original_(i, width_)));
    return s;
  }

  static Scalar abs_(Scalar v) { return v < Scalar(0) ? -v : v; }

  bool is_artificial(Index col) const { return col >= n_ + m_ub_; }

  void set_objective(const Vector& cost) {
    const Index m = static_cast<Index>(basis_.size());
    cost_ = cost;
    t_.row(m).setZero();
    t_.row(m).head(width_) = cost.transpose();
    for (Index i = 0; i < m; ++i) {
      if (!active_[i]) continue;
      Scalar cb = cost[basis_[i]];
      if (cb != Scalar(0)) t_.row(m) -= cb * t_.row(i);
    }
  }

  void pivot(Index r, Index c) {
    const Index rows = t_.rows();
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i < rows; ++i) {
      if (i == r) continue;
      Scalar f = t_(i, c);
      if (f != Scalar(0)) t_.row(i) -= f * t_.row(r);
    }
    t_(r, c) = Scalar(1);
    basis_[r] = c;
  }

  /// Returns false on unboundedness.
  bool run(bool allow_artificial, Index& iterations) {
    const Index m = static_cast<Index>(basis_.size());
    const Scalar tol(opt_.pivot_tolerance);
    const Index bland_after = 2 * (m + width_);
    Index local = 0;
    for (;;) {
      if (iterations >= opt_.iteration_limit)
        throw Error(ErrorCode::IterationLimit, "simplex pivot limit reached");
      const bool bland = local >= bland_after;
      Index enter = -1;
      Scalar best = -tol;
      for (Index j = 0; j < width_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        Scalar rc = t_(m, j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return true;

      Index leave = -1;
      Scalar best_ratio(0);
      for (Index i = 0; i < m; ++i) {
        if (!active_[i]) continue;
        Scalar a = t_(i, enter);
        if (a <= tol) continue;
        Scalar ratio = t_(i, width_) / a;
        if (leave < 0 || ratio < best_ratio - tol ||
            (abs_(ratio - best_ratio) <= tol && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++iterations;
      ++local;
    }
  }

  void drive_out_artificials() {
    const Index m = static_cast<Index>(basis_.size());
    const Scalar tol(opt_.pivot_tolerance);
    for (Index i = 0; i < m; ++i) {
      if (!active_[i] || !is_artificial(basis_[i])) continue;
      Index col = -1;
      Scalar best(0);
      for (Index j = 0; j < n_ + m_ub_; ++j)
        if (abs_(t_(i, j)) > std::max(tol, best)) {
          best = abs_(t_(i, j));
          col = j;
        }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_[i] = false;  // redundant row
        t_.row(i).setZero();
      }
    }
  }

  /// Basic values re-solved from the original rows for accuracy.
  Vector basic_solution() const {
    const Index m = static_cast<Index>(basis_.size());
    std::vector<Index> rows;
    for (Index i = 0; i < m; ++i)
      if (active_[i]) rows.push_back(i);
    const Index r = static_cast<Index>(rows.size());
    Matrix b(r, r);
    Vector rhs(r);
    for (Index a = 0; a < r; ++a) {
      rhs[a] = original_(rows[a], width_);
      for (Index c = 0; c < r; ++c) b(a, c) = original_(rows[a], basis_[rows[c]]);
    }
    Vector xb;
    if (r > 0) {
      Eigen::FullPivLU<Matrix> lu(b);
      if (lu.isInvertible()) {
        xb = lu.solve(rhs);
      } else {
        xb.resize(r);
        for (Index c = 0; c < r; ++c) xb[c] = t_(rows[c], width_);
      }
    }
    Vector x = Vector::Zero(n_);
    for (Index c = 0; c < r; ++c) {
      Index col = basis_[rows[c]];
      if (col < n_) x[col] = xb[c] < Scalar(0) ? Scalar(0) : xb[c];
    }
    return x;
  }

  SimplexOptions opt_;
  Index n_, m_eq_, m_ub_, n_art_ = 0, width_ = 0;
  Matrix t_;
  Matrix original_;
  Vector cost_;
  std::vector<Index> basis_;
  std::vector<bool> active_;
};

}  // namespace detail

/// Two-phase dense tableau simplex. Dantzig pricing, switching to Bland's
/// rule after 2 (rows + columns) pivots in a phase. Throws
/// Error(IterationLimit) past the hard pivot cap.
template <typename Scalar>
LpSolution<Scalar> simplex_solve(const LinearProgram<Scalar>& lp, const SimplexOptions& opt = {}) {
  if (lp.eq_matrix.cols() != lp.num_columns() && lp.num_eq() > 0)
    throw Error(ErrorCode::ShapeMismatch, "equality matrix width differs from the objective");
  if (lp.ub_matrix.cols() != lp.num_columns() && lp.num_ub() > 0)
    throw Error(ErrorCode::ShapeMismatch, "inequality matrix width differs from the objective");
  if (lp.eq_rhs.size() != lp.num_eq() || lp.ub_rhs.size() != lp.num_ub())
    throw Error(ErrorCode::ShapeMismatch, "right-hand side length differs from the row count");
  detail::SimplexTableau<Scalar> tableau(lp, opt);
  return tableau.solve(lp.objective);
}

}  // namespace cmdp
