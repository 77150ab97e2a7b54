#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksgm/error.hpp"

namespace ksgm {

enum class KernelFamily { Uniform, Triangular, Epanechnikov, Cosine };

//! Compactly supported smoothing kernel on [-1, 1] with its smoothness exponent.
struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  double eta = 2.0;
};

inline std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Uniform: return "uniform";
    case KernelFamily::Triangular: return "triangular";
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::Cosine: return "cosine";
  }
  return "unknown";
}

inline std::optional<KernelFamily> parse_kernel_family(std::string_view name) {
  for (auto f : {KernelFamily::Uniform, KernelFamily::Triangular, KernelFamily::Epanechnikov,
                 KernelFamily::Cosine}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

inline double eval_kernel(const KernelSpec& spec, double s) {
  const double a = std::abs(s);
  if (!(a <= 1.0)) return 0.0;
  switch (spec.family) {
    case KernelFamily::Uniform: return 0.5;
    case KernelFamily::Triangular: return 1.0 - a;
    case KernelFamily::Epanechnikov: return 0.75 * (1.0 - a * a);
    case KernelFamily::Cosine: return std::numbers::pi * std::cos(std::numbers::pi * a / 2.0) / 4.0;
  }
  return 0.0;
}

struct WeightVector {
  std::vector<double> weights;
  double target_label = 0.0;
  double bandwidth = 0.0;
  bool normalized = false;
};

//! Boundary constant: 2 exactly at the endpoints of [0, 1], 1 inside.
inline double boundary_constant(double u0) {
  u0 = std::clamp(u0, 0.0, 1.0);
  return (u0 == 0.0 || u0 == 1.0) ? 2.0 : 1.0;
}

/// Label weights c(u0)/(n h) K((u_i - u0)/h), optionally rescaled to sum to one.
/// Throws AllWeightsZero when no label lies inside the kernel window.
inline WeightVector compute_weights(const KernelSpec& spec, std::span<const double> labels,
                                    double u0, double h, bool normalize) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "no labels");
  u0 = std::clamp(u0, 0.0, 1.0);

  const double n = static_cast<double>(labels.size());
  const double scale = boundary_constant(u0) / (n * h);

  WeightVector out;
  out.target_label = u0;
  out.bandwidth = h;
  out.normalized = normalize;
  out.weights.resize(labels.size());

  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double w = scale * eval_kernel(spec, (labels[i] - u0) / h);
    out.weights[i] = w;
    total += w;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::AllWeightsZero,
                "no label within bandwidth " + std::to_string(h) + " of " + std::to_string(u0));
  }
  if (normalize) {
    for (auto& w : out.weights) w /= total;
  }
  return out;
}

// Bandwidth rates. The proportionality constant is fixed at 1, so the
// returned h is a scale suggestion.

inline double bias_rate(int n, double eta) {
  return std::pow(static_cast<double>(n), -2.0 / (2.0 + eta));
}

inline double dependent_variance_rate(int n, int T, int d, double xi, double sigma_op,
                                      double a_op) {
  if (!(a_op < 1.0)) throw Error(ErrorCode::InvalidArgument, "a_op must be < 1");
  const double base = std::log(static_cast<double>(d)) / (static_cast<double>(T) * n);
  return std::sqrt(xi * sigma_op / (1.0 - a_op) * std::sqrt(base));
}

inline double iid_variance_rate(int n, int T, int d) {
  return std::cbrt(std::log(static_cast<double>(d)) / (static_cast<double>(T) * n));
}

inline double theoretical_bandwidth_dependent(int n, int T, int d, double eta, double xi,
                                              double sigma_op, double a_op) {
  return std::max(dependent_variance_rate(n, T, d, xi, sigma_op, a_op), bias_rate(n, eta));
}

inline double theoretical_bandwidth_iid(int n, int T, int d, double eta) {
  return std::max(iid_variance_rate(n, T, d), bias_rate(n, eta));
}

}  // namespace ksgm
