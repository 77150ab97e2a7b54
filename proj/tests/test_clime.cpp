#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ksgm/clime.hpp"
#include "ksgm/rng.hpp"

using namespace ksgm;

namespace {

Matrix random_spd(int d, Rng& rng) {
  Matrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = rng.normal();
  return b * b.transpose() / d + 0.3 * Matrix::Identity(d, d);
}

ErrorCode lp_code(const LpProblem& p) {
  try {
    solve_lp(p);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

// Minimum of c^T z over the vertices of {G z <= b, z >= 0} in two variables.
double vertex_oracle(const LpProblem& p) {
  std::vector<Eigen::Vector3d> lines;  // a1 z1 + a2 z2 = rhs
  for (Eigen::Index i = 0; i < p.constraints.rows(); ++i) {
    lines.emplace_back(p.constraints(i, 0), p.constraints(i, 1), p.bounds(i));
  }
  lines.emplace_back(1, 0, 0);
  lines.emplace_back(0, 1, 0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const double det = lines[a](0) * lines[b](1) - lines[a](1) * lines[b](0);
      if (std::abs(det) < 1e-12) continue;
      const double z1 = (lines[a](2) * lines[b](1) - lines[a](1) * lines[b](2)) / det;
      const double z2 = (lines[a](0) * lines[b](2) - lines[a](2) * lines[b](0)) / det;
      if (z1 < -1e-9 || z2 < -1e-9) continue;
      bool ok = true;
      for (Eigen::Index i = 0; i < p.constraints.rows(); ++i) {
        ok = ok && p.constraints(i, 0) * z1 + p.constraints(i, 1) * z2 <= p.bounds(i) + 1e-9;
      }
      if (ok) best = std::min(best, p.objective(0) * z1 + p.objective(1) * z2);
    }
  }
  return best;
}

}  // namespace

TEST(Lp, Examples) {
  LpProblem p;
  p.objective = Vector::Ones(1);
  p.constraints = Matrix::Constant(1, 1, -1.0);
  p.bounds = Vector::Constant(1, -1.0);
  const auto sol = solve_lp(p);
  EXPECT_NEAR(sol.z(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);

  p.constraints(0, 0) = 1.0;
  EXPECT_EQ(lp_code(p), ErrorCode::Infeasible);

  LpProblem u;
  u.objective = Vector::Constant(1, -1.0);
  u.constraints = Matrix::Zero(0, 1);
  u.bounds = Vector::Zero(0);
  EXPECT_EQ(lp_code(u), ErrorCode::Unbounded);

  LpProblem bad = p;
  bad.bounds = Vector::Zero(2);
  EXPECT_EQ(lp_code(bad), ErrorCode::DimensionMismatch);
}

TEST(Lp, MatchesVertexEnumeration) {
  Rng rng(17);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LpProblem p;
    const int m = 2 + static_cast<int>(rng.index(5));
    p.objective = Vector(2);
    p.objective << rng.uniform(-1, 1), rng.uniform(-1, 1);
    p.constraints = Matrix(m + 1, 2);
    p.bounds = Vector(m + 1);
    for (int i = 0; i < m; ++i) {
      p.constraints(i, 0) = rng.uniform(-1, 1);
      p.constraints(i, 1) = rng.uniform(-1, 1);
      p.bounds(i) = rng.uniform(-1, 1);
    }
    // box row keeps the region bounded
    p.constraints(m, 0) = 1;
    p.constraints(m, 1) = 1;
    p.bounds(m) = 5;
    const double oracle = vertex_oracle(p);
    if (!std::isfinite(oracle)) {
      EXPECT_EQ(lp_code(p), ErrorCode::Infeasible);
      continue;
    }
    const auto sol = solve_lp(p);
    EXPECT_NEAR(sol.objective, oracle, 1e-8);
    const Vector slack = p.bounds - p.constraints * sol.z;
    EXPECT_GE(slack.minCoeff(), -1e-9);
    EXPECT_GE(sol.z.minCoeff(), 0.0);
    ++solved;
  }
  EXPECT_GT(solved, 50);
}

TEST(Column, Examples) {
  const Matrix id = Matrix::Identity(3, 3);
  Vector v = solve_column(id, 0, 0.1);
  EXPECT_NEAR(v(0), 0.9, 1e-12);
  EXPECT_NEAR(v(1), 0.0, 1e-12);
  EXPECT_NEAR(v(2), 0.0, 1e-12);

  for (double lambda : {1.0, 1.5}) {
    EXPECT_EQ(solve_column(id, 2, lambda).cwiseAbs().maxCoeff(), 0.0);
  }

  Matrix s(2, 2);
  s << 1, 0.5, 0.5, 1;
  v = solve_column(s, 0, 0.0);
  EXPECT_NEAR(v(0), 4.0 / 3.0, 1e-9);
  EXPECT_NEAR(v(1), -2.0 / 3.0, 1e-9);

  // grid search at resolution 1e-3 over [-2, 2]^2 with a feasibility slack
  // of half a grid step
  double best = std::numeric_limits<double>::infinity();
  for (int a = -2000; a <= 2000; ++a) {
    for (int b = -2000; b <= 2000; ++b) {
      const double v0 = a * 1e-3, v1 = b * 1e-3;
      const double r0 = std::abs(v0 + 0.5 * v1 - 1.0);
      const double r1 = std::abs(0.5 * v0 + v1);
      if (r0 <= 1e-3 && r1 <= 1e-3) best = std::min(best, std::abs(v0) + std::abs(v1));
    }
  }
  EXPECT_NEAR(v.lpNorm<1>(), best, 2e-3);
}

TEST(Column, SingularAtZeroIsInfeasible) {
  Matrix s = Matrix::Ones(2, 2);
  try {
    solve_column(s, 0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(Precision, IdentityAndSymmetrization) {
  const auto est = estimate_precision(Matrix::Identity(3, 3), 0.1);
  EXPECT_LE((est.matrix - 0.9 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(threshold_graph(est, 0.0).edge_count(), 0u);

  Matrix raw = Matrix::Identity(2, 2);
  raw(0, 1) = 0.3;
  raw(1, 0) = -0.1;
  const Matrix sym = symmetrize_min_magnitude(raw);
  EXPECT_EQ(sym(0, 1), -0.1);
  EXPECT_EQ(sym(1, 0), -0.1);

  raw(0, 1) = 0.2;
  raw(1, 0) = -0.2;
  EXPECT_EQ(symmetrize_min_magnitude(raw)(1, 0), 0.2);
}

TEST(Precision, FeasibleSymmetricMonotone) {
  Rng rng(23);
  const auto grid = lambda_grid(0.01, 1.0, 8);
  for (int trial = 0; trial < 15; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(7));
    const Matrix s = random_spd(d, rng);
    std::vector<double> prev(d, std::numeric_limits<double>::infinity());
    for (double lambda : grid) {
      const auto est = estimate_precision(s, lambda);
      EXPECT_LE((s * est.raw - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), lambda + 1e-7);
      EXPECT_EQ(est.matrix, Matrix(est.matrix.transpose()));
      for (int j = 0; j < d; ++j) {
        const double obj = est.raw.col(j).lpNorm<1>();
        EXPECT_NEAR(obj, est.column_status[j].objective, 1e-12);
        // grid descends, so the feasible set shrinks and objectives grow
        if (std::isfinite(prev[j])) {
          EXPECT_LE(prev[j], obj + 1e-7);
        }
        prev[j] = obj;
      }
      EXPECT_EQ(threshold_graph(est, 0.0), GraphEstimate::support_of(est.matrix));
    }
    EXPECT_EQ(estimate_precision(s, 1.0).matrix.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Precision, SmallLambdaApproachesInverse) {
  Rng rng(31);
  const Matrix s = random_spd(4, rng);
  const auto est = estimate_precision(s, 1e-8);
  EXPECT_LE((est.matrix - invert_spd(s)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Graph, Threshold) {
  Matrix omega = Matrix::Identity(3, 3);
  omega(0, 1) = omega(1, 0) = 0.2;
  omega(1, 2) = omega(2, 1) = -0.05;
  const auto g = threshold_graph(omega, 0.1);
  EXPECT_EQ(g.edges(), (std::vector<std::pair<int, int>>{{0, 1}}));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_FALSE(g.has_edge(0, 0));
  EXPECT_EQ(threshold_graph(omega, 0.0).edge_count(), 2u);
}

TEST(Grid, Examples) {
  const auto g = lambda_grid(0.01, 1.0, 3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_NEAR(g[1], 0.1, 1e-15);
  EXPECT_EQ(g[2], 0.01);
  EXPECT_EQ(lambda_grid(0.2, 0.7, 2), (std::vector<double>{0.7, 0.2}));
  for (double v : lambda_grid(0.003, 2.0, 40)) {
    EXPECT_GE(v, 0.003);
    EXPECT_LE(v, 2.0);
  }
  EXPECT_THROW(lambda_grid(0.0, 1.0, 5), Error);
  EXPECT_THROW(lambda_grid(1.0, 0.5, 5), Error);
}
