#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "w2s/decomp.hpp"

using namespace w2s;

namespace {

ToyPairConfig toy(double sigma2, Index d, Index n, std::uint64_t seed = 1) {
  ToyPairConfig cfg;
  cfg.eta_w = 0.6;
  cfg.d = d;
  cfg.sigma2 = sigma2;
  cfg.n_hat = n;
  cfg.n_tilde = n;
  cfg.seed = seed;
  return cfg;
}

SpikedConfig spiked(Index k, Index d, double sigma2, Index n, std::uint64_t seed) {
  SpikedConfig cfg;
  cfg.k = k;
  cfg.d = d;
  cfg.sigma2 = sigma2;
  cfg.n_hat = n;
  cfg.n_tilde = n;
  cfg.label_coupling.assign(static_cast<std::size_t>(k), k > 0 ? 1.0 / static_cast<double>(k) : 0.0);
  cfg.seed = seed;
  return cfg;
}

PrincipalSubspace full_space(Index d) {
  PrincipalSubspace s;
  s.basis = Mat::Identity(d, d);
  return s;
}

}  // namespace

TEST(GammaFromConfig, ToyValues) {
  const auto pair = gen_toy_pair(toy(8.0, 500, 128));
  const auto p = gamma_from_config(pair.strong);
  EXPECT_NEAR(p.gamma_hat, 0.0625, 1e-15);
  EXPECT_NEAR(p.gamma_tilde, 0.0625, 1e-15);
  EXPECT_EQ(p.gamma, std::min(p.gamma_hat, p.gamma_tilde));
  EXPECT_EQ(p.delta, 0.0);
  EXPECT_NEAR(p.rho, 1.0, 1e-12);
}

TEST(GammaFromConfig, ZeroTailVariance) {
  const auto ds = gen_spiked(spiked(2, 10, 0.0, 16, 1));
  const auto p = gamma_from_config(ds);
  EXPECT_EQ(p.gamma_hat, 0.0);
  EXPECT_EQ(p.gamma_tilde, 0.0);
}

TEST(GammaFromConfig, MissingPopulation) {
  auto ds = gen_spiked(spiked(1, 10, 1.0, 8, 1));
  ds.population.reset();
  EXPECT_ERRC(gamma_from_config(ds), Errc::MissingPopulation);
}

TEST(DecompParams, Validation) {
  DecompParams p;
  p.gamma_hat = 0.2;
  p.gamma_tilde = 0.1;
  p.gamma = 0.2;
  EXPECT_ERRC(p.validate(), Errc::ConfigViolation);
  p.gamma = 0.1;
  EXPECT_NO_THROW(p.validate());
  p.rho = -1;
  EXPECT_ERRC(p.validate(), Errc::ConfigViolation);
}

TEST(DecompReport, FullSpaceHasEmptyComplement) {
  const auto ds = gen_spiked(spiked(2, 12, 1.0, 20, 3));
  const auto r = decomposability_report(ds, full_space(12), DecompParams{});
  EXPECT_EQ(r.c_isotropy.hat, 0.0);
  EXPECT_EQ(r.c_isotropy.tilde, 0.0);
  EXPECT_EQ(r.d_cross, 0.0);
  EXPECT_EQ(r.e_tail, 0.0);
}

TEST(DecompReport, AnalyticTailEqualsPerCoordinateVariance) {
  for (Index d : {50, 400}) {
    const auto ds = gen_spiked(spiked(3, d, 2.5, 16, 4));
    const auto sub = principal_subspace_select(ds, SubspaceSource::analytic, 0.0, false);
    const auto r = decomposability_report(ds, sub, gamma_from_config(ds));
    EXPECT_NEAR(r.e_tail, 2.5 / static_cast<double>(d - 3), 1e-14) << "d " << d;
  }
}

TEST(DecompReport, CovarianceConcentratesInTwoDimensions) {
  // Standard-normal coordinates: an isotropic tail with unit variance per coordinate.
  auto cfg = spiked(0, 2, 2.0, 10000, 5);
  const auto ds = gen_spiked(cfg);
  const auto r = decomposability_report(ds, full_space(2), DecompParams{});
  EXPECT_LE(r.b_concentration.cov_hat, 0.1);
  EXPECT_LE(r.b_concentration.cov_tilde, 0.1);
  const Mat cov = ds.hat.reps * ds.hat.reps.transpose() / 10000.0;
  EXPECT_NEAR(r.b_concentration.cov_hat, operator_norm(Mat(cov - Mat::Identity(2, 2))), 1e-12);
}

TEST(DecompReport, MatchesDenseOracle) {
  const auto ds = gen_spiked(spiked(2, 30, 1.5, 12, 6));
  const auto sub = principal_subspace_select(ds, SubspaceSource::analytic, 0.0, false);
  const auto params = gamma_from_config(ds);
  const auto r = decomposability_report(ds, sub, params);

  const Mat u = sub.basis;
  const Mat comp = Mat::Identity(30, 30) - u * u.transpose();
  const Mat hat_c = comp * ds.hat.reps;
  const Mat tilde_c = comp * ds.tilde.reps;
  const Mat k_hat = oracle::dot_kernel(hat_c) / 12.0 - params.gamma_hat * Mat::Identity(12, 12);
  EXPECT_NEAR(r.c_isotropy.hat, oracle::spectral_norm(k_hat), 1e-10);
  const Mat cross = hat_c.transpose() * tilde_c / 12.0;
  EXPECT_NEAR(r.d_cross, oracle::spectral_norm(cross), 1e-10);

  const Mat sigma = ds.population->dense();
  EXPECT_NEAR(r.e_tail, oracle::spectral_norm(Mat(comp * sigma * comp)), 1e-12);
  EXPECT_NEAR(r.a_bounds.sigma_norm, oracle::spectral_norm(sigma), 1e-12);
  EXPECT_NEAR(r.a_bounds.sigma_hat_norm, oracle::spectral_norm(Mat(ds.hat.reps * ds.hat.reps.transpose() / 12.0)),
              1e-10);
  EXPECT_NEAR(r.a_bounds.mean_y_hat2, ds.hat.labels.squaredNorm() / 12.0, 1e-14);

  const Mat p_hat = u * u.transpose() * ds.hat.reps;
  const Mat sig_hat_v = p_hat * p_hat.transpose() / 12.0;
  const Mat sig_v = u * u.transpose() * sigma * u * u.transpose();
  EXPECT_NEAR(r.b_concentration.cov_hat, oracle::spectral_norm(Mat(sig_hat_v - sig_v)), 1e-10);
  const Vec cross_v = p_hat * ds.hat.labels / 12.0 - u * u.transpose() * ds.population->e_ry;
  EXPECT_NEAR(r.b_concentration.cross_hat, cross_v.norm(), 1e-12);

  const double g = params.gamma, dl = params.delta, rho = params.rho;
  EXPECT_NEAR(r.scales.concentration_cov, g * g + dl * dl + rho * rho, 1e-15);
  EXPECT_NEAR(r.scales.isotropy, g * g + dl * dl, 1e-15);
  EXPECT_NEAR(r.scales.cross, g + dl, 1e-15);
  ASSERT_TRUE(r.ratios.isotropy.has_value());
  EXPECT_NEAR(*r.ratios.isotropy, r.c_isotropy.max() / r.scales.isotropy, 1e-12);
}

TEST(DecompReport, LowDimensionRouteMatchesKernelOracle) {
  auto cfg = spiked(2, 6, 1.5, 20, 9);
  cfg.n_tilde = 15;
  const auto ds = gen_spiked(cfg);
  const auto sub = principal_subspace_select(ds, SubspaceSource::analytic, 0.0, false);
  const auto params = gamma_from_config(ds);
  const auto r = decomposability_report(ds, sub, params);
  const Mat comp = Mat::Identity(6, 6) - sub.basis * sub.basis.transpose();
  const Mat hat_c = comp * ds.hat.reps;
  const Mat tilde_c = comp * ds.tilde.reps;
  const Mat k_hat = oracle::dot_kernel(hat_c) / 20.0 - params.gamma_hat * Mat::Identity(20, 20);
  const Mat k_tilde = oracle::dot_kernel(tilde_c) / 15.0 - params.gamma_tilde * Mat::Identity(15, 15);
  EXPECT_NEAR(r.c_isotropy.hat, oracle::spectral_norm(k_hat), 1e-10);
  EXPECT_NEAR(r.c_isotropy.tilde, oracle::spectral_norm(k_tilde), 1e-10);
  const Mat cross = hat_c.transpose() * tilde_c / std::sqrt(20.0 * 15.0);
  EXPECT_NEAR(r.d_cross, oracle::spectral_norm(cross), 1e-10);
}

TEST(DecompReport, TailNormMatchesDenseForCorrelatedBlocks) {
  const auto ds = gen_spiked(spiked(3, 20, 1.0, 8, 7));
  std::mt19937_64 rng(7);
  Mat basis = Eigen::HouseholderQR<Mat>(oracle::random_matrix(20, 2, rng)).householderQ() * Mat::Identity(20, 2);
  const Mat comp = Mat::Identity(20, 20) - basis * basis.transpose();
  const Mat sigma = ds.population->dense();
  EXPECT_NEAR(tail_population_norm(*ds.population, basis), oracle::spectral_norm(Mat(comp * sigma * comp)), 1e-10);
}

TEST(DecompReport, DeterministicAndRejectsBadSubspace) {
  const auto ds = gen_spiked(spiked(2, 15, 1.0, 10, 8));
  const auto sub = principal_subspace_select(ds, SubspaceSource::analytic, 0.0, false);
  const auto params = gamma_from_config(ds);
  const auto a = decomposability_report(ds, sub, params);
  const auto b = decomposability_report(ds, sub, params);
  EXPECT_EQ(a.c_isotropy.hat, b.c_isotropy.hat);
  EXPECT_EQ(a.d_cross, b.d_cross);
  EXPECT_EQ(a.b_concentration.cov_tilde, b.b_concentration.cov_tilde);
  PrincipalSubspace wrong;
  wrong.basis = Mat::Identity(14, 2);
  EXPECT_ANY_THROW(decomposability_report(ds, wrong, params));
  auto bare = ds;
  bare.population.reset();
  EXPECT_ERRC(decomposability_report(bare, sub, params), Errc::MissingPopulation);
}
