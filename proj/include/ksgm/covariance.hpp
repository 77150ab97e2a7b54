#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ksgm/error.hpp"
#include "ksgm/kernels.hpp"
#include "ksgm/matstat.hpp"

namespace ksgm {

struct Subject {
  double label = 0.0;
  Matrix observations;  // T x d, one row per time point

  bool operator==(const Subject& other) const {
    return label == other.label && observations.rows() == other.observations.rows() &&
           observations.cols() == other.observations.cols() &&
           observations == other.observations;
  }
};

//! Labelled multi-subject panel; subjects are kept sorted by label.
class Panel {
public:
  Panel() = default;

  Panel(std::vector<Subject> subjects) : subjects_(std::move(subjects)) {
    if (subjects_.empty()) throw Error(ErrorCode::InvalidArgument, "panel has no subjects");
    dim_ = static_cast<int>(subjects_.front().observations.cols());
    if (dim_ <= 0) throw Error(ErrorCode::InvalidArgument, "panel dimension must be positive");
    for (const auto& s : subjects_) {
      if (s.observations.cols() != dim_) {
        throw Error(ErrorCode::DimensionMismatch, "subjects disagree on dimension");
      }
      if (s.observations.rows() < 1) {
        throw Error(ErrorCode::TooFewObservations, "subject with no observations");
      }
    }
    std::stable_sort(subjects_.begin(), subjects_.end(),
                     [](const Subject& a, const Subject& b) { return a.label < b.label; });
  }

  int dim() const { return dim_; }
  std::size_t size() const { return subjects_.size(); }
  bool empty() const { return subjects_.empty(); }
  const Subject& operator[](std::size_t i) const { return subjects_[i]; }
  const std::vector<Subject>& subjects() const { return subjects_; }

  std::vector<double> labels() const {
    std::vector<double> out;
    out.reserve(subjects_.size());
    for (const auto& s : subjects_) out.push_back(s.label);
    return out;
  }

  bool operator==(const Panel& other) const = default;

private:
  std::vector<Subject> subjects_;
  int dim_ = 0;
};

/// (1/T) sum_t x_t x_t^T. With `center`, the column means are removed first
/// and the divisor stays T.
inline Matrix subject_covariance(const Matrix& observations, bool center = false) {
  const auto t = observations.rows();
  if (t < 1 || (center && t < 2)) {
    throw Error(ErrorCode::TooFewObservations, "T = " + std::to_string(t));
  }
  Matrix cov;
  if (center) {
    const Matrix x = observations.rowwise() - observations.colwise().mean();
    cov = x.transpose() * x;
  } else {
    cov = observations.transpose() * observations;
  }
  cov /= static_cast<double>(t);
  return 0.5 * (cov + cov.transpose());
}

inline std::vector<Matrix> subject_covariances(const Panel& panel, bool center = false) {
  std::vector<Matrix> out;
  out.reserve(panel.size());
  for (const auto& s : panel.subjects()) out.push_back(subject_covariance(s.observations, center));
  return out;
}

struct SmoothedCovariance {
  Matrix matrix;
  double target_label = 0.0;
  double bandwidth = 0.0;
  KernelSpec kernel;
  bool normalized = false;
  WeightVector weights;
};

//! Weighted sum of precomputed per-subject covariances, accumulated in subject order.
inline SmoothedCovariance smoothed_covariance(const Panel& panel,
                                              const std::vector<Matrix>& covariances, double u0,
                                              double h, const KernelSpec& kernel, bool normalize) {
  if (panel.empty()) throw Error(ErrorCode::InvalidArgument, "empty panel");
  if (covariances.size() != panel.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one covariance per subject required");
  }
  const auto labels = panel.labels();
  SmoothedCovariance out;
  out.weights = compute_weights(kernel, labels, u0, h, normalize);
  out.target_label = out.weights.target_label;
  out.bandwidth = h;
  out.kernel = kernel;
  out.normalized = normalize;
  out.matrix = Matrix::Zero(panel.dim(), panel.dim());
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const double w = out.weights.weights[i];
    if (w != 0.0) out.matrix.noalias() += w * covariances[i];
  }
  return out;
}

inline SmoothedCovariance smoothed_covariance(const Panel& panel, double u0, double h,
                                              const KernelSpec& kernel, bool normalize,
                                              bool center = false) {
  return smoothed_covariance(panel, subject_covariances(panel, center), u0, h, kernel, normalize);
}

}  // namespace ksgm
