#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "w2s/projection.hpp"

using namespace w2s;

namespace {

Mat diag(std::initializer_list<double> v) {
  Mat m = Mat::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

ProjectionOperator op(const Mat& m, Side side = Side::weak) {
  ProjectionOperator p;
  p.matrix = m;
  p.eff_reg = 1.0;
  p.side = side;
  p.spectrum = sym_eigenvalues(m);
  return p;
}

/// Reps whose second-moment matrix R R^T / n is exactly diag(values).
Mat reps_with_moments(const std::vector<double>& values) {
  const auto d = static_cast<Index>(values.size());
  Mat r = Mat::Zero(d, 2 * d);
  for (Index i = 0; i < d; ++i) {
    const double a = std::sqrt(values[static_cast<std::size_t>(i)] * static_cast<double>(d));
    r(i, 2 * i) = a;
    r(i, 2 * i + 1) = -a;
  }
  return r;
}

ToyPairConfig toy(double eta_w, std::uint64_t seed) {
  ToyPairConfig cfg;
  cfg.eta_w = eta_w;
  cfg.d = 2000;
  cfg.sigma2 = 4.0;
  cfg.n_hat = 24;
  cfg.n_tilde = 24;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(KernelMatrix, Examples) {
  EXPECT_EQ(kernel_matrix(Mat::Identity(2, 2)), Mat::Identity(2, 2));
  Mat r(2, 2);
  r << 1, 3, 2, 4;
  EXPECT_EQ(kernel_matrix(r), (Mat(2, 2) << 5, 11, 11, 25).finished());
  PrincipalSubspace first;
  first.basis = Mat::Identity(2, 1);
  EXPECT_EQ(kernel_matrix(r, first), (Mat(2, 2) << 1, 3, 3, 9).finished());
}

TEST(KernelMatrix, MatchesDotProductOracle) {
  std::mt19937_64 rng(1);
  const Mat r = oracle::random_matrix(30, 12, rng);
  EXPECT_LE((kernel_matrix(r) - oracle::dot_kernel(r)).cwiseAbs().maxCoeff(), 1e-10);
  const auto sub = select_pca(r, 0.2);
  const Mat projected = sub.basis * sub.basis.transpose() * r;
  EXPECT_LE((kernel_matrix(r, sub) - oracle::dot_kernel(projected)).cwiseAbs().maxCoeff(), 1e-10);
  PrincipalSubspace wrong;
  wrong.basis = Mat::Identity(5, 1);
  EXPECT_ERRC(kernel_matrix(r, wrong), Errc::DimensionMismatch);
}

TEST(KernelMatrix, BiasRowAppended) {
  Mat r(1, 2);
  r << 2, 3;
  PrincipalSubspace sub;
  sub.basis = Mat::Identity(2, 2);
  sub.bias_appended = true;
  EXPECT_EQ(kernel_matrix(r, sub), (Mat(2, 2) << 5, 7, 7, 10).finished());
}

TEST(SelectPca, ThresholdArithmetic) {
  const Mat r = reps_with_moments({4, 2, 0.1});
  const auto sub = select_pca(r, 0.1);
  ASSERT_EQ(sub.rank(), 2);
  EXPECT_LE((sub.basis - Mat::Identity(3, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(select_pca(r, 0.0).rank(), 3);
  EXPECT_EQ(select_pca(r, 0.5).rank(), 2);
  EXPECT_EQ(select_pca(r, 0.51).rank(), 1);
}

TEST(SelectPca, ZeroAlphaKeepsPositiveEigenvaluesOnly) {
  Mat r = Mat::Zero(4, 3);
  r.topRows(2) << 1, 2, 0, 0, 1, 1;
  EXPECT_EQ(select_pca(r, 0.0).rank(), 2);
}

TEST(SelectPca, GramRouteMatchesPrimal) {
  std::mt19937_64 rng(2);
  const Mat r = oracle::random_matrix(40, 10, rng);
  const auto wide = select_pca(r, 0.3);
  const Mat cov = r * r.transpose() / 10.0;
  const auto eig = sym_eig(cov);
  Index keep = 0;
  while (keep < 40 && eig.values(keep) >= 0.3 * eig.values(0)) ++keep;
  ASSERT_EQ(wide.rank(), keep);
  const Mat pw = wide.basis * wide.basis.transpose();
  const Mat pe = eig.vectors.leftCols(keep) * eig.vectors.leftCols(keep).transpose();
  EXPECT_LE((pw - pe).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((wide.basis.transpose() * wide.basis - Mat::Identity(keep, keep)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SelectPca, NestedInAlpha) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat r = oracle::random_matrix(8, 30, rng);
    const auto coarse = select_pca(r, 0.5);
    const auto fine = select_pca(r, 0.1);
    ASSERT_LE(coarse.rank(), fine.rank());
    const Mat residual = coarse.basis - fine.basis * (fine.basis.transpose() * coarse.basis);
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SelectPca, ErrorCases) {
  EXPECT_ERRC(select_pca(Mat::Identity(2, 2), 1.5), Errc::ConfigViolation);
  EXPECT_ERRC(select_pca(Mat::Zero(3, 4), 0.1), Errc::DegenerateData);
}

TEST(SelectVariance, KeepsHighMomentCoordinates) {
  const Mat r = reps_with_moments({4, 2, 0.1});
  const auto sub = select_variance(r, 0.1);
  EXPECT_EQ(sub.basis, Mat::Identity(3, 2));
  EXPECT_EQ(sub.source, SubspaceSource::variance_threshold);
}

TEST(SelectAnalytic, ToyStrongModelIsFirstCoordinate) {
  const auto pair = gen_toy_pair(toy(0.6, 1));
  const auto sub = principal_subspace_select(pair.strong, SubspaceSource::analytic, 0.0, false);
  ASSERT_EQ(sub.rank(), 1);
  EXPECT_EQ(sub.basis(0, 0), 1.0);
  EXPECT_EQ(sub.basis.bottomRows(sub.ambient_dim() - 1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_ERRC(principal_subspace_select(pair.strong, SubspaceSource::analytic, 0.0, true), Errc::ConfigViolation);
  RepDataset bare = pair.strong;
  bare.population.reset();
  EXPECT_ERRC(principal_subspace_select(bare, SubspaceSource::analytic, 0.0, false), Errc::MissingPopulation);
}

TEST(BuildP, EigenvalueMapExamples) {
  const auto half = build_P(2.0 * Mat::Identity(2, 2), 1.0, Side::strong);
  EXPECT_LE((half.matrix - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  const auto p = build_P(diag({6, 0}), 1.0, Side::weak);
  EXPECT_LE((p.matrix - diag({0.75, 0})).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(operator_norm(build_P(Mat::Identity(3, 3), 1e6, Side::weak).matrix), 1e-6 * (1 + 1e-6));
}

TEST(BuildP, ErrorCases) {
  EXPECT_ERRC(build_P(Mat::Identity(2, 2), 0.0, Side::weak), Errc::ConfigViolation);
  EXPECT_ERRC(build_P(diag({1, -1}), 1.0, Side::weak), Errc::NonPSD);
}

TEST(BuildP, SpectrumInUnitIntervalAndMatchesMap) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat r = oracle::random_matrix(15, 10, rng);
    const Mat k = kernel_matrix(r);
    const double eff = 0.01 + 0.1 * trial;
    const auto p = build_P(k, eff, Side::weak);
    EXPECT_LE((p.matrix - p.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    const Vec ev = sym_eigenvalues(p.matrix);
    EXPECT_GE(ev.minCoeff(), -1e-12);
    EXPECT_LT(ev.maxCoeff(), 1.0);
    const Vec lam = sym_eigenvalues(Mat(k / 10.0));
    const Vec mapped = lam.array() / (lam.array() + eff);
    EXPECT_LE((ev - mapped).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(WeakErrorVector, LimitCases) {
  const Vec y = (Vec(4) << 1, -2, 0.5, 3).finished();
  const Vec scaled = y / 2.0;
  EXPECT_LE((weak_error_vector(op(Mat::Zero(4, 4)), y) - scaled).cwiseAbs().maxCoeff(), 1e-15);
  std::mt19937_64 rng(5);
  const Mat r = oracle::random_matrix(8, 4, rng);
  const auto sharp = build_P(kernel_matrix(r), 1e-10, Side::weak);
  EXPECT_LE(weak_error_vector(sharp, y).norm(), 1e-6);
}

TEST(TheoryRhs, Examples) {
  const Vec y = (Vec(2) << std::sqrt(2.0), 0).finished();  // y / sqrt(n) = [1, 0]
  EXPECT_NEAR(theory_predgap_rhs(op(diag({0.8, 0.2})), op(diag({0.5, 0.5})), y), 0.16, 1e-15);
  EXPECT_EQ(theory_predgap_rhs(op(diag({0.8, 0.2})), op(Mat::Identity(2, 2)), y), 0.0);
  EXPECT_EQ(theory_predgap_rhs(op(Mat::Zero(2, 2)), op(diag({0.5, 0.5})), y), 0.0);
}

TEST(Metrics, Examples) {
  const Vec y = (Vec(2) << 1, 1).finished();
  const auto m = w2s_metrics(op(diag({0.8, 0.2})), op(diag({0.5, 0.9})), y);
  EXPECT_NEAR(m.norm_ps_ipw, 0.4, 1e-15);
  EXPECT_NEAR(m.norm_ps_ipw_ps, 0.32, 1e-15);
  EXPECT_NEAR(m.C, 1.0, 1e-15);
  EXPECT_NEAR(m.bound1, 0.16, 1e-15);
  EXPECT_FALSE(m.bound2.has_value());
  const auto full = w2s_metrics(op(diag({0.8, 0.2})), op(Mat::Identity(2, 2)), y, 0.1);
  EXPECT_EQ(full.norm_ps_ipw, 0.0);
  EXPECT_EQ(full.norm_ps_ipw_ps, 0.0);
  ASSERT_TRUE(full.bound2.has_value());
  EXPECT_NEAR(*full.bound2, 0.1, 1e-15);
  EXPECT_ERRC(w2s_metrics(op(Mat::Identity(3, 3)), op(Mat::Identity(2, 2)), y), Errc::DimensionMismatch);
}

TEST(Metrics, DegenerateLabels) {
  const auto m = w2s_metrics(op(diag({0.8, 0.2})), op(diag({0.5, 0.9})), Vec::Zero(2), 0.0);
  EXPECT_TRUE(m.degenerate_labels);
  EXPECT_EQ(m.C, 0.0);
  EXPECT_EQ(m.bound1, 0.0);
  EXPECT_EQ(*m.bound2, 0.0);
}

TEST(Metrics, RhsBelowBoundsOnRandomInstances) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat rw = oracle::random_matrix(6, 12, rng);
    const Mat rs = oracle::random_matrix(9, 12, rng);
    const Vec y = oracle::random_matrix(12, 1, rng);
    const auto pw = build_P(kernel_matrix(rw), 0.3, Side::weak);
    const auto ps = build_P(kernel_matrix(rs), 0.2, Side::strong);
    const double err_sc = ((Mat::Identity(12, 12) - ps.matrix) * y / std::sqrt(12.0)).squaredNorm();
    const auto m = w2s_metrics(ps, pw, y, err_sc);
    const double rhs = theory_predgap_rhs(ps, pw, y);
    EXPECT_NEAR(m.theory_rhs, rhs, 1e-14);
    EXPECT_LE(rhs, m.bound1 + 1e-10);
    EXPECT_LE(rhs, *m.bound2 + 1e-10);
    EXPECT_LE(m.norm_ps_ipw_ps, m.norm_ps_ipw + 1e-10);
  }
}

TEST(ProjectionFromSubspace, ToyOperatorsHaveValidSpectra) {
  const auto pair = gen_toy_pair(toy(0.6, 2));
  const auto sub = principal_subspace_select(pair.strong, SubspaceSource::pca_threshold, 0.1, false);
  const auto p = projection_from_subspace(pair.strong.hat.reps, sub, 4.0 / 24, Side::strong);
  EXPECT_EQ(p.size(), 24);
  EXPECT_GE(p.spectrum.minCoeff(), -1e-12);
  EXPECT_LT(p.spectrum.maxCoeff(), 1.0);
  const auto biased = principal_subspace_select(pair.strong, SubspaceSource::pca_threshold, 0.1, true);
  EXPECT_TRUE(biased.bias_appended);
  EXPECT_EQ(biased.ambient_dim(), 2001);
  EXPECT_NO_THROW(projection_from_subspace(pair.strong.hat.reps, biased, 0.1, Side::strong));
}
