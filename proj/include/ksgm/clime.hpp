#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ksgm/error.hpp"
#include "ksgm/lp.hpp"
#include "ksgm/matstat.hpp"

namespace ksgm {

inline constexpr double kDefaultGamma = 1e-5;

struct ColumnStatus {
  int pivots = 0;
  double objective = 0.0;
};

struct PrecisionEstimate {
  Matrix matrix;      // symmetrized
  Matrix raw;         // column solutions before symmetrization
  double lambda = 0.0;
  std::vector<ColumnStatus> column_status;
};

//! Undirected graph on d nodes stored as a dense symmetric 0/1 pattern.
class GraphEstimate {
public:
  GraphEstimate() = default;
  explicit GraphEstimate(int d, double gamma = 0.0)
      : d_(d), gamma_(gamma), adj_(static_cast<std::size_t>(d) * d, 0) {}

  int dim() const { return d_; }
  double gamma() const { return gamma_; }

  bool has_edge(int j, int k) const { return adj_[index(j, k)] != 0; }

  void set_edge(int j, int k, bool present = true) {
    if (j == k) return;
    adj_[index(j, k)] = present;
    adj_[index(k, j)] = present;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int j = 0; j < d_; ++j) {
      for (int k = j + 1; k < d_; ++k) {
        if (has_edge(j, k)) out.emplace_back(j, k);
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (int j = 0; j < d_; ++j) {
      for (int k = j + 1; k < d_; ++k) n += has_edge(j, k);
    }
    return n;
  }

  //! Off-diagonal nonzero pattern of a matrix.
  static GraphEstimate support_of(const Matrix& m, double gamma = 0.0) {
    GraphEstimate g(static_cast<int>(m.rows()), gamma);
    for (int j = 0; j < g.d_; ++j) {
      for (int k = j + 1; k < g.d_; ++k) {
        if (std::abs(m(j, k)) > gamma || std::abs(m(k, j)) > gamma) g.set_edge(j, k);
      }
    }
    return g;
  }

  bool operator==(const GraphEstimate& other) const {
    return d_ == other.d_ && adj_ == other.adj_;
  }

private:
  std::size_t index(int j, int k) const { return static_cast<std::size_t>(j) * d_ + k; }

  int d_ = 0;
  double gamma_ = 0.0;
  std::vector<unsigned char> adj_;
};

/// One CLIME column: argmin ||v||_1 subject to ||S v - e_j||_inf <= lambda.
///
/// Encoded with v = p - q, p, q >= 0, objective sum(p + q) and the 2d rows
///   S(p - q) <= lambda + e_j,   -S(p - q) <= lambda - e_j.
inline Vector solve_column(const Matrix& s, int j, double lambda, double tol = kLpTol,
                           ColumnStatus* status = nullptr) {
  require_symmetric(s, "covariance estimate");
  const int d = static_cast<int>(s.rows());
  if (j < 0 || j >= d) throw Error(ErrorCode::InvalidArgument, "column index out of range");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");

  LpProblem lp;
  lp.objective = Vector::Ones(2 * d);
  lp.constraints.resize(2 * d, 2 * d);
  lp.constraints << s, -s, -s, s;
  lp.bounds = Vector::Constant(2 * d, lambda);
  lp.bounds(j) += 1.0;
  lp.bounds(d + j) -= 1.0;

  const LpSolution sol = solve_lp(lp, tol);
  Vector v = sol.z.head(d) - sol.z.tail(d);

  Vector residual = s * v;
  residual(j) -= 1.0;
  const double violation = residual.cwiseAbs().maxCoeff();
  if (violation > lambda + 10.0 * tol) {
    throw Error(ErrorCode::NumericalFailure,
                "column " + std::to_string(j) + " violates its constraint by " +
                    std::to_string(violation - lambda));
  }
  if (status) *status = {sol.pivots, v.lpNorm<1>()};
  return v;
}

/// Keeps, for each pair, whichever of raw(j,k), raw(k,j) is smaller in
/// magnitude; ties go to the upper-triangle entry.
inline Matrix symmetrize_min_magnitude(const Matrix& raw) {
  Matrix out = raw;
  for (Eigen::Index j = 0; j < raw.rows(); ++j) {
    for (Eigen::Index k = j + 1; k < raw.cols(); ++k) {
      const double v = std::abs(raw(j, k)) <= std::abs(raw(k, j)) ? raw(j, k) : raw(k, j);
      out(j, k) = v;
      out(k, j) = v;
    }
  }
  return out;
}

inline PrecisionEstimate estimate_precision(const Matrix& s, double lambda, double tol = kLpTol) {
  require_symmetric(s, "covariance estimate");
  const int d = static_cast<int>(s.rows());
  PrecisionEstimate out;
  out.lambda = lambda;
  out.raw.resize(d, d);
  out.column_status.resize(d);
  for (int j = 0; j < d; ++j) {
    try {
      out.raw.col(j) = solve_column(s, j, lambda, tol, &out.column_status[j]);
    } catch (const Error& e) {
      throw Error(e.code(), "column " + std::to_string(j) + ": " + e.what());
    }
  }
  out.matrix = symmetrize_min_magnitude(out.raw);
  return out;
}

//! Edge (j, k) iff |Omega_jk| > gamma, diagonal excluded.
inline GraphEstimate threshold_graph(const Matrix& omega, double gamma = kDefaultGamma) {
  GraphEstimate g(static_cast<int>(omega.rows()), gamma);
  for (int j = 0; j < g.dim(); ++j) {
    for (int k = j + 1; k < g.dim(); ++k) {
      if (std::abs(omega(j, k)) > gamma) g.set_edge(j, k);
    }
  }
  return g;
}

inline GraphEstimate threshold_graph(const PrecisionEstimate& omega, double gamma = kDefaultGamma) {
  return threshold_graph(omega.matrix, gamma);
}

//! Geometric grid from hi down to lo, endpoints exact.
inline std::vector<double> lambda_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(lo < hi) || count < 2) {
    throw Error(ErrorCode::InvalidArgument, "lambda grid needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> grid(count);
  const double ratio = lo / hi;
  for (int i = 0; i < count; ++i) {
    const double v = hi * std::pow(ratio, static_cast<double>(i) / (count - 1));
    grid[i] = std::clamp(v, lo, hi);
  }
  grid.front() = hi;
  grid.back() = lo;
  return grid;
}

}  // namespace ksgm
