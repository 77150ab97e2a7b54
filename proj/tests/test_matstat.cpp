#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ksgm/matstat.hpp"

using namespace ksgm;

namespace {

Matrix random_spd(int d, Rng& rng) {
  Matrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = rng.normal();
  return b * b.transpose() + 0.5 * Matrix::Identity(d, d);
}

double svd_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Cholesky, HandExamples) {
  EXPECT_TRUE(cholesky(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  Matrix m(2, 2);
  m << 4, 2, 2, 5;
  Matrix expected(2, 2);
  expected << 2, 0, 1, 2;
  EXPECT_LE((cholesky(m) - expected).cwiseAbs().maxCoeff(), 1e-15);

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_EQ(code_of([&] { cholesky(bad); }), ErrorCode::NotPositiveDefinite);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  EXPECT_EQ(code_of([&] { cholesky(asym); }), ErrorCode::NotSymmetric);
}

TEST(Cholesky, ReconstructsRandomSpd) {
  Rng rng(11);
  for (int d : {1, 3, 8, 20}) {
    const Matrix m = random_spd(d, rng);
    const Matrix l = cholesky(m);
    EXPECT_LE((l * l.transpose() - m).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_TRUE(l.isLowerTriangular());
  }
}

TEST(Inverse, Examples) {
  EXPECT_TRUE(invert_spd(Matrix::Identity(4, 4)).isApprox(Matrix::Identity(4, 4)));
  Matrix m = Vector::Ones(2).asDiagonal();
  m(0, 0) = 2;
  m(1, 1) = 4;
  const Matrix inv = invert_spd(m);
  EXPECT_DOUBLE_EQ(inv(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(inv(1, 1), 0.25);
  EXPECT_EQ(inv(0, 1), 0.0);

  Rng rng(5);
  const Matrix s = random_spd(5, rng);
  EXPECT_LE((s * invert_spd(s) - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(band_matrix(3, 0.5)).value, 0.7071067812, 1e-8);
  Matrix diag = Matrix::Zero(3, 3);
  diag.diagonal() << 0.2, -0.6, 0.4;
  EXPECT_NEAR(spectral_norm(diag).value, 0.6, 1e-10);
  EXPECT_EQ(spectral_norm(Matrix::Zero(4, 4)).value, 0.0);
}

TEST(SpectralNorm, MatchesSvd) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng.index(8));
    const int cols = 2 + static_cast<int>(rng.index(8));
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    const auto r = spectral_norm(m);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, svd_norm(m), 1e-6 * svd_norm(m));
  }
}

TEST(SpectralNorm, BandFormula) {
  for (int d : {3, 10, 50}) {
    for (double rho : {0.1, -0.1, 0.3, -0.3, 0.45, -0.45}) {
      TransitionSpec spec;
      spec.structure = TransitionStructure::Band;
      spec.rho = rho;
      const auto a = build_transition(spec, d, 0);
      const double expected = 2.0 * std::abs(rho) * std::cos(std::numbers::pi / (d + 1));
      EXPECT_NEAR(a.norm, expected, 1e-8) << "d=" << d << " rho=" << rho;
    }
  }
}

TEST(SpectralNorm, SignFlipKeepsEigenvalues) {
  for (int d : {3, 5, 10}) {
    for (double rho : {0.2, 0.5, 0.8}) {
      Eigen::SelfAdjointEigenSolver<Matrix> plus(ar_offdiagonal(d, rho));
      Eigen::SelfAdjointEigenSolver<Matrix> minus(ar_offdiagonal(d, -rho));
      EXPECT_LE((plus.eigenvalues() - minus.eigenvalues()).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(SpectralNorm, MonotoneInCorrelation) {
  for (int d : {3, 10, 30}) {
    double prev = 0.0;
    for (int i = 0; i <= 9; ++i) {
      const double v = spectral_norm(ar_matrix(d, 0.1 * i)).value;
      EXPECT_LE(prev, v + 1e-10);
      prev = v;
    }
  }
}

TEST(Norms, Examples) {
  const auto id = matrix_norms(Matrix::Identity(3, 3));
  EXPECT_DOUBLE_EQ(id.l1, 1.0);
  EXPECT_NEAR(id.l2, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(id.max, 1.0);
  EXPECT_DOUBLE_EQ(id.frobenius, std::sqrt(3.0));

  Matrix m(2, 2);
  m << 1, -2, 0, 3;
  const auto n = matrix_norms(m);
  EXPECT_DOUBLE_EQ(n.l1, 5.0);
  EXPECT_DOUBLE_EQ(n.max, 3.0);
  EXPECT_DOUBLE_EQ(n.frobenius, std::sqrt(14.0));
  EXPECT_NEAR(n.l2, svd_norm(m), 1e-9);

  const auto z = matrix_norms(Matrix::Zero(3, 3));
  EXPECT_EQ(z.l1 + z.l2 + z.max + z.frobenius, 0.0);
}

TEST(Transition, Structures) {
  TransitionSpec spec;
  spec.structure = TransitionStructure::Diagonal;
  spec.rho = 0.4;
  auto a = build_transition(spec, 3, 0);
  EXPECT_TRUE(a.entries.isApprox(0.4 * Matrix::Identity(3, 3)));
  EXPECT_NEAR(a.norm, 0.4, 1e-12);

  spec.structure = TransitionStructure::Band;
  spec.rho = 0.6;
  EXPECT_EQ(code_of([&] { build_transition(spec, 10, 0); }), ErrorCode::NotStationary);

  spec.structure = TransitionStructure::BlockAR;
  spec.rho = 0.5;
  spec.blocks = {3, 3, 4};
  spec.scale = 0.3;
  a = build_transition(spec, 10, 0);
  const int start[] = {0, 0, 0, 3, 3, 3, 6, 6, 6, 6};
  const int size[] = {3, 3, 3, 3, 3, 3, 4, 4, 4, 4};
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const bool same = start[i] == start[j];
      const double expected = (same && i != j) ? 0.3 * std::pow(0.5, std::abs(i - j)) : 0.0;
      EXPECT_DOUBLE_EQ(a.entries(i, j), expected);
    }
    EXPECT_GT(size[i], 0);
  }

  spec.blocks = {3, 3};
  EXPECT_EQ(code_of([&] { build_transition(spec, 10, 0); }), ErrorCode::BadBlocks);
  spec.structure = TransitionStructure::Diagonal;
  spec.blocks = {5, 5};
  EXPECT_EQ(code_of([&] { build_transition(spec, 10, 0); }), ErrorCode::BadBlocks);
}

TEST(Transition, RandomSparse) {
  TransitionSpec spec;
  spec.structure = TransitionStructure::RandomSparse;
  const auto a = build_transition(spec, 20, 77);
  EXPECT_NEAR(a.norm, 0.5, 1e-9);
  EXPECT_NEAR(svd_norm(a.entries), 0.5, 1e-8);
  EXPECT_TRUE(is_symmetric(a.entries));
  for (int j = 0; j < 20; ++j) EXPECT_EQ(a.entries(j, j), 0.0);
  const auto b = build_transition(spec, 20, 77);
  EXPECT_EQ(a.entries, b.entries);
  spec.target_norm = 0.8;
  EXPECT_NEAR(build_transition(spec, 20, 77).norm, 0.8, 1e-9);
  spec.scale = 0.5;
  EXPECT_THROW(build_transition(spec, 20, 77), Error);
}

TEST(Stationary, Examples) {
  const Matrix id = Matrix::Identity(3, 3);
  const Matrix s = stationary_covariance(Matrix(0.5 * id), id);
  EXPECT_LE((s - id / 0.75).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_EQ(stationary_covariance(Matrix::Zero(3, 3), id), id);

  const Matrix a = band_matrix(2, 0.3);
  const Matrix psi = Matrix::Identity(2, 2);
  const Matrix sigma = stationary_covariance(a, psi);
  EXPECT_LE((sigma - a * sigma * a.transpose() - psi).cwiseAbs().maxCoeff(), 1e-10);

  EXPECT_EQ(residual_covariance(Matrix::Zero(3, 3), id), id);
  EXPECT_LE((residual_covariance(Matrix(0.5 * id), id) - 0.75 * id).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(code_of([&] { stationary_covariance(Matrix(1.2 * id), id); }), ErrorCode::NotStationary);
}

TEST(Stationary, RoundTrip) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(6));
    TransitionSpec spec;
    spec.structure = TransitionStructure::RandomSparse;
    spec.target_norm = rng.uniform(0.1, 0.9);
    const auto a = build_transition(spec, d, rng.next());
    const Matrix psi = random_spd(d, rng);
    const Matrix sigma = stationary_covariance(a, psi);
    EXPECT_LE((residual_covariance(a, sigma) - psi).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Symmetry, Tolerance) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0 + 5e-13;
  EXPECT_TRUE(is_symmetric(m));
  m(1, 0) = 1.0 + 1e-11;
  EXPECT_FALSE(is_symmetric(m));
  EXPECT_NEAR(min_eigenvalue(Matrix::Identity(3, 3)), 1.0, 1e-14);
}
