#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksgm/covariance.hpp"
#include "ksgm/error.hpp"
#include "ksgm/matstat.hpp"
#include "ksgm/parallel.hpp"
#include "ksgm/rng.hpp"

namespace ksgm {

enum class PathSetting { Simultaneous, Sequential, Random, ConstantCustom };

inline std::string_view to_string(PathSetting s) {
  switch (s) {
    case PathSetting::Simultaneous: return "simultaneous";
    case PathSetting::Sequential: return "sequential";
    case PathSetting::Random: return "random";
    case PathSetting::ConstantCustom: return "constant";
  }
  return "unknown";
}

inline std::optional<PathSetting> parse_path_setting(std::string_view name) {
  for (auto s : {PathSetting::Simultaneous, PathSetting::Sequential, PathSetting::Random,
                 PathSetting::ConstantCustom}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

struct SimConfig {
  int d = 0;
  int n = 0;
  int T = 0;
  int n_fix = 0;
  int n_grow = 0;
  int n_decay = 0;
  int n_ed = 0;
  TransitionSpec transition;
  std::uint64_t seed = 0;
  double strength_lo = -0.3;
  double strength_hi = -0.1;
  double diag_boost = 0.25;
};

struct Edge {
  int j = 0;
  int k = 0;
  double value = 0.0;
};

//! Label-indexed precision matrices Omega(u) built from an explicit edge ledger.
class PrecisionPath {
public:
  struct TimedEdge {
    int j = 0;
    int k = 0;
    double strength = 0.0;  // value at full strength
  };

  PathSetting setting() const { return setting_; }
  int dim() const { return d_; }

  //! Off-diagonal entries present at label u (strictly nonzero values only).
  std::vector<Edge> edge_ledger(double u) const {
    std::vector<Edge> out;
    auto push = [&](int j, int k, double v) {
      if (v != 0.0) out.push_back({std::min(j, k), std::max(j, k), v});
    };
    if (setting_ == PathSetting::Random) {
      for (const auto& e : random_edges_at(u)) push(e.j, e.k, e.strength);
    } else {
      for (const auto& e : fixed_) push(e.j, e.k, e.strength);
      for (const auto& e : decay_) push(e.j, e.k, e.strength * (1.0 - u));
      for (std::size_t m = 0; m < grow_.size(); ++m) {
        push(grow_[m].j, grow_[m].k, grow_[m].strength * grow_fraction(m, u));
      }
    }
    std::sort(out.begin(), out.end(),
              [](const Edge& a, const Edge& b) { return a.j != b.j ? a.j < b.j : a.k < b.k; });
    return out;
  }

  /// Omega(u): ledger off-diagonals, each |value| added to both incident
  /// diagonal entries, plus diag_boost on the whole diagonal. Checked PD.
  Matrix precision(double u) const {
    Matrix omega = diag_boost_ * Matrix::Identity(d_, d_);
    for (const auto& e : edge_ledger(u)) {
      omega(e.j, e.k) = e.value;
      omega(e.k, e.j) = e.value;
      omega(e.j, e.j) += std::abs(e.value);
      omega(e.k, e.k) += std::abs(e.value);
    }
    cholesky(omega);
    return omega;
  }

  Matrix covariance(double u) const { return invert_spd(precision(u)); }

  // Builders -----------------------------------------------------------------

  static PrecisionPath simultaneous(const SimConfig& config, Rng& rng) {
    return build_evolving(config, rng, PathSetting::Simultaneous);
  }

  static PrecisionPath sequential(const SimConfig& config, Rng& rng) {
    if (config.n_decay != 0) {
      throw Error(ErrorCode::InvalidArgument, "sequential setting requires n_decay = 0");
    }
    return build_evolving(config, rng, PathSetting::Sequential);
  }

  static PrecisionPath random(const SimConfig& config, std::span<const double> labels, Rng& rng) {
    validate(config);
    check_budget(config.d, config.n_ed);
    PrecisionPath p(config, PathSetting::Random);
    for (double u : labels) {
      if (p.find_label(u) >= 0) continue;
      const auto pairs = draw_pairs(config.d, config.n_ed, rng);
      std::vector<TimedEdge> edges;
      edges.reserve(pairs.size());
      for (auto [j, k] : pairs) edges.push_back({j, k, draw_strength(config, rng)});
      p.random_labels_.push_back(u);
      p.random_by_label_.push_back(std::move(edges));
    }
    return p;
  }

  //! u-constant path with the given off-diagonal edges.
  static PrecisionPath constant(int d, std::vector<TimedEdge> edges, double diag_boost = 0.25) {
    SimConfig c;
    c.d = d;
    c.diag_boost = diag_boost;
    validate(c);
    PrecisionPath p(c, PathSetting::ConstantCustom);
    p.fixed_ = std::move(edges);
    return p;
  }

  const std::vector<TimedEdge>& fixed_edges() const { return fixed_; }
  const std::vector<TimedEdge>& decay_edges() const { return decay_; }
  const std::vector<TimedEdge>& grow_edges() const { return grow_; }

private:
  PrecisionPath(const SimConfig& c, PathSetting s) : setting_(s), d_(c.d), diag_boost_(c.diag_boost) {}

  static void validate(const SimConfig& c) {
    if (c.d <= 0) throw Error(ErrorCode::InvalidArgument, "d must be positive");
    if (!(c.diag_boost > 0.0)) throw Error(ErrorCode::InvalidArgument, "diag_boost must be positive");
    if (c.n_fix < 0 || c.n_grow < 0 || c.n_decay < 0 || c.n_ed < 0) {
      throw Error(ErrorCode::InvalidArgument, "edge counts must be nonnegative");
    }
    if (!(c.strength_lo <= c.strength_hi)) {
      throw Error(ErrorCode::InvalidArgument, "strength range is empty");
    }
  }

  static void check_budget(int d, long long needed) {
    const long long pairs = static_cast<long long>(d) * (d - 1) / 2;
    if (needed > pairs) {
      throw Error(ErrorCode::EdgeBudgetExceeded,
                  std::to_string(needed) + " edges requested, " + std::to_string(pairs) + " available");
    }
  }

  static double draw_strength(const SimConfig& c, Rng& rng) {
    return rng.uniform(c.strength_lo, c.strength_hi);
  }

  // `count` distinct unordered pairs by a partial Fisher-Yates shuffle over
  // the row-major upper-triangle enumeration.
  static std::vector<std::pair<int, int>> draw_pairs(int d, int count, Rng& rng) {
    std::vector<std::pair<int, int>> all;
    all.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) all.emplace_back(j, k);
    }
    for (int i = 0; i < count; ++i) {
      const std::size_t pick = i + rng.index(all.size() - i);
      std::swap(all[i], all[pick]);
    }
    all.resize(count);
    return all;
  }

  static PrecisionPath build_evolving(const SimConfig& c, Rng& rng, PathSetting setting) {
    validate(c);
    check_budget(c.d, static_cast<long long>(c.n_fix) + c.n_grow + c.n_decay);
    PrecisionPath p(c, setting);
    const auto pairs = draw_pairs(c.d, c.n_fix + c.n_decay + c.n_grow, rng);
    std::size_t next = 0;
    for (int i = 0; i < c.n_fix; ++i, ++next) {
      p.fixed_.push_back({pairs[next].first, pairs[next].second, draw_strength(c, rng)});
    }
    for (int i = 0; i < c.n_decay; ++i, ++next) {
      p.decay_.push_back({pairs[next].first, pairs[next].second, draw_strength(c, rng)});
    }
    for (int i = 0; i < c.n_grow; ++i, ++next) {
      p.grow_.push_back({pairs[next].first, pairs[next].second, draw_strength(c, rng)});
    }
    return p;
  }

  // Simultaneous: linear in u. Sequential: edge m ramps over
  // [m/n_grow, (m+1)/n_grow], complete at the right end point inclusive.
  double grow_fraction(std::size_t m, double u) const {
    if (setting_ != PathSetting::Sequential) return u;
    const double f = u * static_cast<double>(grow_.size()) - static_cast<double>(m);
    if (f <= 1e-12) return 0.0;
    if (f >= 1.0 - 1e-12) return 1.0;
    return f;
  }

  int find_label(double u) const {
    for (std::size_t i = 0; i < random_labels_.size(); ++i) {
      if (std::abs(random_labels_[i] - u) <= 1e-12) return static_cast<int>(i);
    }
    return -1;
  }

  const std::vector<TimedEdge>& random_edges_at(double u) const {
    const int i = find_label(u);
    if (i < 0) throw Error(ErrorCode::UnknownLabel, "label " + std::to_string(u) + " not in path");
    return random_by_label_[i];
  }

  PathSetting setting_;
  int d_ = 0;
  double diag_boost_ = 0.25;
  std::vector<TimedEdge> fixed_, decay_, grow_;
  std::vector<double> random_labels_;
  std::vector<std::vector<TimedEdge>> random_by_label_;
};

inline PrecisionPath path_simultaneous(const SimConfig& config, Rng& rng) {
  return PrecisionPath::simultaneous(config, rng);
}

inline PrecisionPath path_sequential(const SimConfig& config, Rng& rng) {
  return PrecisionPath::sequential(config, rng);
}

inline PrecisionPath path_random(const SimConfig& config, std::span<const double> labels, Rng& rng) {
  return PrecisionPath::random(config, labels, rng);
}

//! n equispaced labels 0, 1/(n-1), ..., 1 (a single label sits at 0).
inline std::vector<double> equispaced_labels(int n) {
  if (n <= 0) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
  return out;
}

/// Draws one subject of T observations from the stationary VAR(1) with
/// transition A and marginal covariance Sigma: x_1 ~ N(0, Sigma) exactly,
/// then x_t = A x_{t-1} + eps_t with eps_t ~ N(0, Sigma - A Sigma A^T).
inline Matrix sample_var1(const Matrix& sigma, const Matrix& a, int T, Rng& rng) {
  Matrix psi_chol;
  try {
    psi_chol = cholesky(residual_covariance(a, sigma));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    throw Error(ErrorCode::ResidualNotPD, "Sigma - A Sigma A^T is not positive definite");
  }
  const Matrix sigma_chol = cholesky(sigma);
  const auto d = sigma.rows();

  Matrix x(T, d);
  Vector z(d);
  auto draw = [&] {
    for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
  };
  draw();
  Vector prev = sigma_chol * z;
  x.row(0) = prev.transpose();
  for (int t = 1; t < T; ++t) {
    draw();
    Vector cur = a * prev + psi_chol * z;
    x.row(t) = cur.transpose();
    prev = std::move(cur);
  }
  return x;
}

/// One subject per label, each on its own stream derive_seed(stream_seed,
/// stream::subject_base + i). Output does not depend on `threads`.
inline Panel sample_panel(const PrecisionPath& path, std::span<const double> labels, int T,
                          const TransitionMatrix& a, std::uint64_t stream_seed, int threads = 1) {
  if (T < 1) throw Error(ErrorCode::TooFewObservations, "T must be positive");
  if (a.dim() != path.dim()) throw Error(ErrorCode::DimensionMismatch, "A does not match path");
  if (!(spectral_norm(a.entries).value < 1.0)) throw Error(ErrorCode::NotStationary, "||A||_2 >= 1");

  std::vector<Subject> subjects(labels.size());
  parallel_for(labels.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(stream_seed, stream::subject_base + i));
    subjects[i] = {labels[i], sample_var1(path.covariance(labels[i]), a.entries, T, rng)};
  });
  return Panel(std::move(subjects));
}

//! Subject i keeps its label and receives the observations of subject perm[i].
inline Panel permute_labels(const Panel& panel, std::span<const std::size_t> perm) {
  if (perm.size() != panel.size()) throw Error(ErrorCode::BadPermutation, "length mismatch");
  std::vector<char> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) throw Error(ErrorCode::BadPermutation, "not a bijection");
    seen[p] = 1;
  }
  std::vector<Subject> out;
  out.reserve(panel.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.push_back({panel[i].label, panel[perm[i]].observations});
  }
  return Panel(std::move(out));
}

}  // namespace ksgm
