#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksgm/error.hpp"
#include "ksgm/rng.hpp"

namespace ksgm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPivotFloor = 1e-12;

inline bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    for (Eigen::Index k = j + 1; k < m.cols(); ++k) {
      if (std::abs(m(j, k) - m(k, j)) > kSymmetryTol * std::max(1.0, std::abs(m(j, k)))) {
        return false;
      }
    }
  }
  return true;
}

inline void require_symmetric(const Matrix& m, std::string_view what) {
  if (!is_symmetric(m)) throw Error(ErrorCode::NotSymmetric, std::string(what));
}

inline void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, std::string(what));
}

//! Lower Cholesky factor; rejects pivots at or below 1e-12.
inline Matrix cholesky(const Matrix& m) {
  require_symmetric(m, "cholesky input");
  Eigen::LLT<Matrix> llt(m);
  Matrix l = llt.matrixL();
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky breakdown");
  }
  for (Eigen::Index k = 0; k < l.rows(); ++k) {
    if (!(l(k, k) * l(k, k) > kPivotFloor)) {
      throw Error(ErrorCode::NotPositiveDefinite, "pivot " + std::to_string(k) + " below floor");
    }
  }
  return l;
}

inline bool is_positive_definite(const Matrix& m) {
  try {
    cholesky(m);
    return true;
  } catch (const Error&) {
    return false;
  }
}

inline Matrix invert_spd(const Matrix& m) {
  const Matrix l = cholesky(m);
  Matrix inv = Matrix::Identity(m.rows(), m.cols());
  l.triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return 0.5 * (inv + inv.transpose());
}

inline double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct SpectralNorm {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

inline constexpr int kPowerIterationCap = 10'000;
inline constexpr double kPowerIterationTol = 1e-10;

/// Largest singular value by power iteration on M^T M. The start vector is a
/// fixed pseudo-random draw, so results are reproducible. When the cap is hit
/// the best estimate is returned with `converged == false`.
inline SpectralNorm spectral_norm(const Matrix& m) {
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) return {0.0, 0, true};

  Rng rng(0x5EEDF00Dull);
  Vector v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-1.0, 1.0);
  v.normalize();

  double prev = 0.0;
  double rayleigh = 0.0;
  for (int it = 1; it <= kPowerIterationCap; ++it) {
    const Vector w = m * v;
    rayleigh = w.squaredNorm();
    const Vector z = m.transpose() * w;
    const double zn = z.norm();
    if (zn == 0.0) return {std::sqrt(rayleigh), it, true};
    v = z / zn;
    if (std::abs(rayleigh - prev) <= kPowerIterationTol * rayleigh) {
      return {std::sqrt(rayleigh), it, true};
    }
    prev = rayleigh;
  }
  return {std::sqrt(rayleigh), kPowerIterationCap, false};
}

struct MatrixNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double max = 0.0;
  double frobenius = 0.0;
};

inline MatrixNorms matrix_norms(const Matrix& m) {
  if (m.size() == 0) return {};
  return {m.cwiseAbs().colwise().sum().maxCoeff(), spectral_norm(m).value, m.cwiseAbs().maxCoeff(),
          m.norm()};
}

// ---------------------------------------------------------------------------
// Transition matrices

enum class TransitionStructure { Diagonal, Band, BlockAR, RandomSparse, Custom };

inline std::string_view to_string(TransitionStructure s) {
  switch (s) {
    case TransitionStructure::Diagonal: return "diagonal";
    case TransitionStructure::Band: return "band";
    case TransitionStructure::BlockAR: return "block_ar";
    case TransitionStructure::RandomSparse: return "random_sparse";
    case TransitionStructure::Custom: return "custom";
  }
  return "unknown";
}

inline std::optional<TransitionStructure> parse_transition_structure(std::string_view name) {
  for (auto s : {TransitionStructure::Diagonal, TransitionStructure::Band,
                 TransitionStructure::BlockAR, TransitionStructure::RandomSparse,
                 TransitionStructure::Custom}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

//! VAR(1) coefficient matrix with ||A||_2 < 1.
struct TransitionMatrix {
  Matrix entries;
  TransitionStructure structure = TransitionStructure::Custom;
  double rho = 0.0;
  double norm = 0.0;

  Eigen::Index dim() const { return entries.rows(); }
};

inline constexpr double kStationarityTol = 1e-10;

inline TransitionMatrix make_transition(Matrix entries,
                                        TransitionStructure structure = TransitionStructure::Custom,
                                        double rho = 0.0) {
  require_square(entries, "transition matrix must be square");
  const double norm = spectral_norm(entries).value;
  if (!(norm < 1.0 - kStationarityTol)) {
    throw Error(ErrorCode::NotStationary, "||A||_2 = " + std::to_string(norm));
  }
  return {std::move(entries), structure, rho, norm};
}

//! Recipe for a structured transition matrix.
struct TransitionSpec {
  TransitionStructure structure = TransitionStructure::Diagonal;
  double rho = 0.0;
  std::vector<int> blocks;             // BlockAR only; must sum to d
  std::optional<double> target_norm;   // rescale to this spectral norm
  std::optional<double> scale;         // or multiply the raw matrix by this factor
  std::optional<Matrix> entries;       // Custom only
};

//! Entries rho^{|j-k|} off the diagonal, zero on it.
inline Matrix ar_offdiagonal(int d, double rho) {
  Matrix m = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      if (j != k) m(j, k) = std::pow(rho, std::abs(j - k));
    }
  }
  return m;
}

//! Entries rho^{|j-k|} including a unit diagonal.
inline Matrix ar_matrix(int d, double rho) {
  return ar_offdiagonal(d, rho) + Matrix::Identity(d, d);
}

inline Matrix band_matrix(int d, double rho) {
  Matrix m = Matrix::Zero(d, d);
  for (int j = 0; j + 1 < d; ++j) {
    m(j, j + 1) = rho;
    m(j + 1, j) = rho;
  }
  return m;
}

// Erdos-Renyi symmetric pattern with edge probability 3/d and entries
// +-Unif[0.5, 1], zero diagonal.
inline Matrix random_sparse_matrix(int d, Rng& rng) {
  Matrix m = Matrix::Zero(d, d);
  const double p = std::min(1.0, 3.0 / d);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      if (rng.uniform() < p) {
        double v = rng.uniform(0.5, 1.0);
        if (rng.uniform() < 0.5) v = -v;
        m(j, k) = v;
        m(k, j) = v;
      }
    }
  }
  return m;
}

inline TransitionMatrix build_transition(const TransitionSpec& spec, int d, std::uint64_t seed) {
  if (d <= 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (spec.target_norm && spec.scale) {
    throw Error(ErrorCode::InvalidArgument, "target_norm and scale are mutually exclusive");
  }
  Matrix raw;
  std::optional<double> target = spec.target_norm;
  switch (spec.structure) {
    case TransitionStructure::Diagonal:
      raw = spec.rho * Matrix::Identity(d, d);
      break;
    case TransitionStructure::Band:
      raw = band_matrix(d, spec.rho);
      break;
    case TransitionStructure::BlockAR: {
      if (spec.blocks.empty()) throw Error(ErrorCode::BadBlocks, "block_ar requires block sizes");
      int total = 0;
      for (int b : spec.blocks) {
        if (b <= 0) throw Error(ErrorCode::BadBlocks, "block sizes must be positive");
        total += b;
      }
      if (total != d) {
        throw Error(ErrorCode::BadBlocks,
                    "blocks sum to " + std::to_string(total) + ", expected " + std::to_string(d));
      }
      raw = Matrix::Zero(d, d);
      int offset = 0;
      for (int b : spec.blocks) {
        raw.block(offset, offset, b, b) = ar_offdiagonal(b, spec.rho);
        offset += b;
      }
      break;
    }
    case TransitionStructure::RandomSparse: {
      Rng rng(seed);
      raw = random_sparse_matrix(d, rng);
      if (!target && !spec.scale) target = 0.5;
      break;
    }
    case TransitionStructure::Custom:
      if (!spec.entries) throw Error(ErrorCode::InvalidArgument, "custom transition needs entries");
      raw = *spec.entries;
      if (raw.rows() != d || raw.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "custom transition has wrong shape");
      }
      break;
  }
  if (spec.structure != TransitionStructure::BlockAR && !spec.blocks.empty()) {
    throw Error(ErrorCode::BadBlocks, "blocks given for a non-block structure");
  }

  if (spec.scale) {
    raw *= *spec.scale;
  } else if (target) {
    if (!(*target > 0.0 && *target < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "target_norm must lie in (0, 1)");
    }
    const double current = spectral_norm(raw).value;
    if (current > 0.0) raw *= *target / current;
  }
  return make_transition(std::move(raw), spec.structure, spec.rho);
}

// ---------------------------------------------------------------------------
// Stationary VAR(1) covariance

inline constexpr int kLyapunovCap = 100'000;

/// Solves Sigma = A Sigma A^T + Psi by the fixed-point iteration started at
/// Psi. Stops once the max-norm update drops below 1e-12 * max(1, |Sigma|_max).
inline Matrix stationary_covariance(const Matrix& a, const Matrix& psi) {
  require_square(a, "transition matrix");
  require_symmetric(psi, "innovation covariance");
  if (a.rows() != psi.rows()) throw Error(ErrorCode::DimensionMismatch, "A and Psi differ in size");
  if (!(spectral_norm(a).value < 1.0)) throw Error(ErrorCode::NotStationary, "||A||_2 >= 1");

  Matrix sigma = psi;
  for (int it = 0; it < kLyapunovCap; ++it) {
    Matrix next = a * sigma * a.transpose() + psi;
    next = 0.5 * (next + next.transpose());
    const double update = (next - sigma).cwiseAbs().maxCoeff();
    sigma = std::move(next);
    if (update < 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) return sigma;
  }
  throw Error(ErrorCode::NotStationary, "Lyapunov iteration did not converge");
}

inline Matrix stationary_covariance(const TransitionMatrix& a, const Matrix& psi) {
  return stationary_covariance(a.entries, psi);
}

//! Psi = Sigma - A Sigma A^T; throws NotPositiveDefinite when Psi is not PD.
inline Matrix residual_covariance(const Matrix& a, const Matrix& sigma) {
  require_square(a, "transition matrix");
  require_symmetric(sigma, "stationary covariance");
  if (a.rows() != sigma.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A and Sigma differ in size");
  }
  Matrix psi = sigma - a * sigma * a.transpose();
  psi = 0.5 * (psi + psi.transpose());
  cholesky(psi);
  return psi;
}

inline Matrix residual_covariance(const TransitionMatrix& a, const Matrix& sigma) {
  return residual_covariance(a.entries, sigma);
}

}  // namespace ksgm
