#include <gtest/gtest.h>

#include <vector>

#include "ksgm/covariance.hpp"
#include "ksgm/rng.hpp"

using namespace ksgm;

namespace {

Matrix random_obs(int T, int d, Rng& rng) {
  Matrix x(T, d);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < d; ++k) x(t, k) = rng.normal();
  return x;
}

Panel random_panel(std::vector<double> labels, int T, int d, Rng& rng) {
  std::vector<Subject> subjects;
  for (double u : labels) subjects.push_back({u, random_obs(T, d, rng)});
  return Panel(std::move(subjects));
}

}  // namespace

TEST(Panel, Validation) {
  EXPECT_THROW(Panel(std::vector<Subject>{}), Error);
  std::vector<Subject> mixed{{0.1, Matrix::Zero(3, 2)}, {0.2, Matrix::Zero(3, 3)}};
  EXPECT_THROW(Panel{mixed}, Error);
  std::vector<Subject> empty_series{{0.1, Matrix::Zero(0, 2)}};
  EXPECT_THROW(Panel{empty_series}, Error);
}

TEST(Panel, SortsByLabelStably) {
  std::vector<Subject> s{{0.7, Matrix::Constant(1, 1, 1.0)},
                         {0.2, Matrix::Constant(1, 1, 2.0)},
                         {0.7, Matrix::Constant(1, 1, 3.0)}};
  Panel p(s);
  EXPECT_EQ(p.labels(), (std::vector<double>{0.2, 0.7, 0.7}));
  EXPECT_EQ(p[1].observations(0, 0), 1.0);
  EXPECT_EQ(p[2].observations(0, 0), 3.0);
}

TEST(SubjectCovariance, Examples) {
  Matrix one(1, 2);
  one << 1, 2;
  Matrix expected(2, 2);
  expected << 1, 2, 2, 4;
  EXPECT_EQ(subject_covariance(one), expected);

  Matrix two(2, 2);
  two << 1, 0, -1, 0;
  Matrix e2 = Matrix::Zero(2, 2);
  e2(0, 0) = 1;
  EXPECT_EQ(subject_covariance(two), e2);

  EXPECT_THROW(subject_covariance(one, true), Error);
}

TEST(SubjectCovariance, CenteredHasZeroMeanDivisorT) {
  Rng rng(1);
  Matrix x = random_obs(30, 3, rng);
  x.rowwise() += Eigen::RowVectorXd::Constant(3, 5.0);
  const Matrix c = subject_covariance(x, true);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  EXPECT_LE((c - xc.transpose() * xc / 30.0).cwiseAbs().maxCoeff(), 1e-12);
  for (int k = 0; k < 3; ++k) EXPECT_GE(c(k, k), 0.0);
  EXPECT_TRUE(is_symmetric(c));
}

TEST(Smoothed, IdenticalCovariancesGiveThatCovariance) {
  Matrix c(2, 2);
  c << 2, 0.5, 0.5, 1;
  std::vector<Subject> s;
  Matrix obs(2, 2);
  obs << 1, 0, 0, 1;
  for (double u : {0.1, 0.3, 0.5}) s.push_back({u, obs});
  Panel p(s);
  std::vector<Matrix> covs(3, c);
  const auto out = smoothed_covariance(p, covs, 0.3, 0.5, {KernelFamily::Epanechnikov}, true);
  EXPECT_LE((out.matrix - c).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Smoothed, SingleSubjectInWindow) {
  Rng rng(2);
  Panel p = random_panel({0.0, 0.5, 1.0}, 10, 3, rng);
  const auto out = smoothed_covariance(p, 0.5, 0.2, {KernelFamily::Uniform}, true);
  EXPECT_EQ(out.matrix, subject_covariance(p[1].observations));
}

TEST(Smoothed, TwoSubjectMixture) {
  Rng rng(3);
  Panel p = random_panel({0.4, 0.6}, 5, 2, rng);
  const auto out = smoothed_covariance(p, 0.5, 0.5, {KernelFamily::Uniform}, false);
  const Matrix expected =
      0.5 * subject_covariance(p[0].observations) + 0.5 * subject_covariance(p[1].observations);
  EXPECT_LE((out.matrix - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Smoothed, SymmetricPsdAndLocal) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> labels(8);
    for (auto& u : labels) u = rng.uniform();
    Panel p = random_panel(labels, 6, 4, rng);
    const double u0 = rng.uniform();
    const double h = rng.uniform(0.2, 0.6);
    SmoothedCovariance s;
    try {
      s = smoothed_covariance(p, u0, h, {KernelFamily::Epanechnikov}, true);
    } catch (const Error&) {
      continue;
    }
    EXPECT_EQ(s.matrix, Matrix(s.matrix.transpose()));
    EXPECT_GE(min_eigenvalue(s.matrix), -1e-10);

    // a subject outside the window leaves the normalized estimate unchanged
    auto subjects = p.subjects();
    const double far = u0 > 0.5 ? 0.0 : 1.0;
    if (std::abs(far - u0) <= h) continue;
    subjects.push_back({far, random_obs(6, 4, rng)});
    const auto t = smoothed_covariance(Panel(subjects), u0, h, {KernelFamily::Epanechnikov}, true);
    EXPECT_LE((t.matrix - s.matrix).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Smoothed, EmptyWindowThrows) {
  Rng rng(5);
  Panel p = random_panel({0.9}, 3, 2, rng);
  try {
    smoothed_covariance(p, 0.0, 0.2, {}, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllWeightsZero);
  }
}
