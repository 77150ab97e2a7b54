#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksgm/clime.hpp"
#include "ksgm/covariance.hpp"
#include "ksgm/error.hpp"
#include "ksgm/kernels.hpp"
#include "ksgm/matstat.hpp"
#include "ksgm/simulate.hpp"

namespace ksgm {

enum class Method { KSE, Naive };

inline std::string_view to_string(Method m) { return m == Method::KSE ? "KSE" : "Naive"; }

inline std::optional<Method> parse_method(std::string_view name) {
  if (name == "KSE") return Method::KSE;
  if (name == "Naive") return Method::Naive;
  return std::nullopt;
}

// Empty optionals mark an undefined rate (no true edges for TPR, complete
// truth for FPR).
struct Rates {
  std::optional<double> tpr;
  std::optional<double> fpr;
};

struct RocPoint {
  double lambda = 0.0;
  std::optional<double> tpr;
  std::optional<double> fpr;
};

struct SkippedPoint {
  double lambda = 0.0;
  std::string reason;
};

struct RocCurve {
  std::vector<RocPoint> points;  // in grid order (descending lambda)
  std::vector<SkippedPoint> skipped;
};

struct EstimationErrors {
  double l1 = 0.0;
  double l2 = 0.0;
  double frobenius = 0.0;
};

inline GraphEstimate graph_from_edges(int d, std::span<const Edge> edges) {
  GraphEstimate g(d);
  for (const auto& e : edges) {
    if (e.value != 0.0) g.set_edge(e.j, e.k);
  }
  return g;
}

inline Rates tpr_fpr(const GraphEstimate& estimated, const GraphEstimate& truth) {
  if (estimated.dim() != truth.dim()) throw Error(ErrorCode::DimensionMismatch, "graph sizes differ");
  const int d = truth.dim();
  long long true_edges = 0, hits = 0, false_hits = 0;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const bool t = truth.has_edge(j, k);
      const bool e = estimated.has_edge(j, k);
      true_edges += t;
      hits += t && e;
      false_hits += e && !t;
    }
  }
  const long long pairs = static_cast<long long>(d) * (d - 1) / 2;
  Rates r;
  if (true_edges > 0) r.tpr = static_cast<double>(hits) / true_edges;
  if (pairs - true_edges > 0) r.fpr = static_cast<double>(false_hits) / (pairs - true_edges);
  return r;
}

/// Covariance of the subject at label u0 (average over several if labels
/// repeat). Throws NoSubjectAtLabel.
inline Matrix naive_covariance(const Panel& panel, const std::vector<Matrix>& covariances,
                               double u0) {
  Matrix sum;
  int count = 0;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (std::abs(panel[i].label - u0) > 1e-12) continue;
    if (count++ == 0) {
      sum = covariances[i];
    } else {
      sum += covariances[i];
    }
  }
  if (count == 0) throw Error(ErrorCode::NoSubjectAtLabel, "no subject at label " + std::to_string(u0));
  return count == 1 ? sum : Matrix(sum / count);
}

inline Matrix naive_covariance(const Panel& panel, double u0, bool center = false) {
  return naive_covariance(panel, subject_covariances(panel, center), u0);
}

//! Tuning shared by both estimators.
struct EstimatorOptions {
  double h = 0.5;
  KernelSpec kernel;
  bool normalize = false;
  bool center = false;
  double gamma = kDefaultGamma;
  double tol = kLpTol;
};

inline Matrix method_covariance(Method method, const Panel& panel,
                                const std::vector<Matrix>& covariances, double u0,
                                const EstimatorOptions& opt) {
  if (method == Method::Naive) return naive_covariance(panel, covariances, u0);
  return smoothed_covariance(panel, covariances, u0, opt.h, opt.kernel, opt.normalize).matrix;
}

/// TPR/FPR along a lambda grid for a fixed covariance estimate. Infeasible
/// lambdas are recorded as skipped instead of aborting the sweep.
inline RocCurve roc_from_covariance(const Matrix& s, std::span<const double> grid,
                                    const GraphEstimate& truth, const EstimatorOptions& opt) {
  RocCurve out;
  for (double lambda : grid) {
    try {
      const auto omega = estimate_precision(s, lambda, opt.tol);
      const auto rates = tpr_fpr(threshold_graph(omega, opt.gamma), truth);
      out.points.push_back({lambda, rates.tpr, rates.fpr});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible && e.code() != ErrorCode::NumericalFailure &&
          e.code() != ErrorCode::IterationLimit) {
        throw;
      }
      out.skipped.push_back({lambda, e.what()});
    }
  }
  return out;
}

inline RocCurve roc_curve(const Panel& panel, double u0, std::span<const double> grid,
                          const GraphEstimate& truth, Method method, const EstimatorOptions& opt) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] < grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "lambda grid must descend");
  }
  const auto covs = subject_covariances(panel, opt.center);
  return roc_from_covariance(method_covariance(method, panel, covs, u0, opt), grid, truth, opt);
}

/// Area under the ROC curve: points sorted by FPR, anchored at (0,0) and
/// (1,1), TPR replaced by its running maximum (monotone envelope), trapezoid
/// rule. Points with an undefined rate are ignored.
inline double auc(std::span<const RocPoint> points) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) {
    if (p.tpr && p.fpr) pts.emplace_back(*p.fpr, *p.tpr);
  }
  if (pts.empty()) throw Error(ErrorCode::InvalidArgument, "no defined ROC points");
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());

  double area = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (const auto& [fpr, tpr_raw] : pts) {
    const double tpr = std::max(tpr_raw, prev_tpr);
    area += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return std::clamp(area, 0.0, 1.0);
}

inline EstimationErrors estimation_errors(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "estimate and truth differ in shape");
  }
  const auto n = matrix_norms(estimate - truth);
  return {n.l1, n.l2, n.frobenius};
}

inline EstimationErrors estimation_errors(const PrecisionEstimate& estimate, const Matrix& truth) {
  return estimation_errors(estimate.matrix, truth);
}

// ---------------------------------------------------------------------------
// Convergence rates

struct RateParams {
  double xi = 1.0;        // sup_u max_j Sigma_jj / min_j Sigma_jj
  double sigma_op = 1.0;  // sup_u ||Sigma(u)||_2
  double a_op = 0.0;      // sup_u ||A(u)||_2
  double eta = 2.0;

  void validate() const {
    if (!(xi >= 1.0)) throw Error(ErrorCode::InvalidArgument, "xi must be >= 1");
    if (!(sigma_op > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_op must be positive");
    if (!(a_op >= 0.0 && a_op < 1.0)) throw Error(ErrorCode::InvalidArgument, "a_op must be in [0, 1)");
  }
};

inline double kappa(int n, int T, int d, const RateParams& p) {
  p.validate();
  return dependent_variance_rate(n, T, d, p.xi, p.sigma_op, p.a_op) + bias_rate(n, p.eta);
}

inline double kappa_star(int n, int T, int d, double eta) {
  return iid_variance_rate(n, T, d) + bias_rate(n, eta);
}

//! Rate parameters measured on a path at the given labels.
inline RateParams rate_params_from_path(const PrecisionPath& path, std::span<const double> labels,
                                        const TransitionMatrix& a, double eta) {
  RateParams p;
  p.eta = eta;
  p.a_op = a.norm;
  p.xi = 1.0;
  p.sigma_op = 0.0;
  for (double u : labels) {
    const Matrix sigma = path.covariance(u);
    const Vector diag = sigma.diagonal();
    p.xi = std::max(p.xi, diag.maxCoeff() / diag.minCoeff());
    p.sigma_op = std::max(p.sigma_op, spectral_norm(sigma).value);
  }
  return p;
}

}  // namespace ksgm
