#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ksgm/error.hpp"
#include "ksgm/matstat.hpp"

namespace ksgm {

//! minimize c^T z  subject to  G z <= b,  z >= 0.
struct LpProblem {
  Vector objective;
  Matrix constraints;
  Vector bounds;
};

struct LpSolution {
  Vector z;
  double objective = 0.0;
  int pivots = 0;
};

inline constexpr double kLpTol = 1e-9;
inline constexpr int kLpPivotCap = 50'000;

namespace detail {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense two-phase primal simplex with Bland's rule.
//
// Tableau layout: rows [0, m) are constraints, row m is the phase-2 reduced
// cost row, row m+1 the phase-1 row. Columns: originals, slacks, artificials,
// then the right-hand side. The cost rows store -objective in the rhs column.
class Simplex {
public:
  Simplex(const LpProblem& p, double tol) : tol_(tol) {
    m_ = static_cast<int>(p.constraints.rows());
    n_ = static_cast<int>(p.constraints.cols());
    for (int i = 0; i < m_; ++i) {
      if (p.bounds(i) < 0.0) ++n_art_;
    }
    cols_ = n_ + m_ + n_art_;
    rhs_ = cols_;
    t_ = Tableau::Zero(m_ + 2, cols_ + 1);
    basis_.resize(m_);

    int art = 0;
    for (int i = 0; i < m_; ++i) {
      const double sign = p.bounds(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * p.constraints.row(i);
      t_(i, n_ + i) = sign;
      t_(i, rhs_) = sign * p.bounds(i);
      if (sign < 0.0) {
        const int col = n_ + m_ + art++;
        t_(i, col) = 1.0;
        basis_[i] = col;
      } else {
        basis_[i] = n_ + i;
      }
    }
    t_.row(m_).head(n_) = p.objective.transpose();
    // Phase-1 costs: 1 on every artificial, then price out the artificial basis.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= n_ + m_) t_.row(m_ + 1) -= t_.row(i);
    }
    for (int c = n_ + m_; c < cols_; ++c) t_(m_ + 1, c) = 0.0;
  }

  LpSolution solve() {
    if (n_art_ > 0) {
      run(m_ + 1, cols_);
      if (-t_(m_ + 1, rhs_) > tol_) {
        throw Error(ErrorCode::Infeasible,
                    "phase-1 optimum " + std::to_string(-t_(m_ + 1, rhs_)));
      }
      evict_artificials();
    }
    run(m_, n_ + m_);

    LpSolution out;
    out.z = Vector::Zero(n_);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) out.z(basis_[i]) = std::max(0.0, t_(i, rhs_));
    }
    out.pivots = pivots_;
    return out;
  }

private:
  // Optimizes the cost row `cost` over entering columns [0, allowed).
  void run(int cost, int allowed) {
    for (;;) {
      int enter = -1;
      for (int c = 0; c < allowed; ++c) {
        if (t_(cost, c) < -tol_) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= tol_) continue;
        const double ratio = std::max(0.0, t_(i, rhs_)) / a;
        if (leave < 0 || ratio < best - 1e-12) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-12 && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave < 0) throw Error(ErrorCode::Unbounded, "no leaving row for column " + std::to_string(enter));
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    if (++pivots_ > kLpPivotCap) throw Error(ErrorCode::IterationLimit, "simplex pivot cap reached");
    t_.row(row) /= t_(row, col);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  // Artificials left basic at level zero are swapped for any real column with
  // a usable pivot; rows with none are redundant and stay inert.
  void evict_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_ + m_) continue;
      for (int c = 0; c < n_ + m_; ++c) {
        if (std::abs(t_(i, c)) > tol_) {
          pivot(i, c);
          break;
        }
      }
    }
  }

  double tol_;
  int m_ = 0, n_ = 0, n_art_ = 0, cols_ = 0, rhs_ = 0;
  int pivots_ = 0;
  Tableau t_;
  std::vector<int> basis_;
};

}  // namespace detail

/// Solves the LP to within `tol`. Throws Infeasible, Unbounded or
/// IterationLimit.
inline LpSolution solve_lp(const LpProblem& problem, double tol = kLpTol) {
  const auto n = problem.constraints.cols();
  if (problem.objective.size() != n || problem.constraints.rows() != problem.bounds.size()) {
    throw Error(ErrorCode::DimensionMismatch, "inconsistent LP dimensions");
  }
  detail::Simplex simplex(problem, tol);
  LpSolution out = simplex.solve();
  out.objective = problem.objective.dot(out.z);
  return out;
}

}  // namespace ksgm
