#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "w2s/harness.hpp"

using namespace w2s;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ToyPairConfig toy(double eta_w, Index d, Index n, double sigma2) {
  ToyPairConfig cfg;
  cfg.eta_w = eta_w;
  cfg.eta_s = 1.0;
  cfg.d = d;
  cfg.sigma2 = sigma2;
  cfg.n_hat = n;
  cfg.n_tilde = n;
  return cfg;
}

Betas tiny_betas(const ToyPairConfig& cfg) {
  const double b = 1e-6 * cfg.sigma2 / static_cast<double>(cfg.n_hat);
  return {b, b};
}

EmpiricalProjection pca_projection(const ToyPairConfig& cfg) {
  EmpiricalProjection p;
  p.mode = SubspaceSource::pca_threshold;
  p.alpha_w = p.alpha_s = 0.1;
  p.beta_eff_w = p.beta_eff_s = cfg.sigma2 / static_cast<double>(cfg.n_hat);
  return p;
}

const std::vector<double> kGrid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

}  // namespace

TEST(Spearman, Examples) {
  EXPECT_NEAR(spearman(vec({1, 2, 3}), vec({2, 4, 6})), 1.0, 1e-15);
  EXPECT_NEAR(spearman(vec({1, 2, 3}), vec({3, 2, 1})), -1.0, 1e-15);
  // 1 - 6 * 2 / (4 * 15)
  EXPECT_NEAR(spearman(vec({1, 2, 3, 4}), vec({1, 3, 2, 4})), 0.8, 1e-15);
}

TEST(Spearman, AverageRanksForTies) {
  EXPECT_EQ(average_ranks(vec({10, 20, 20, 30})), vec({1, 2.5, 2.5, 4}));
  EXPECT_EQ(average_ranks(vec({3, 1, 2})), vec({3, 1, 2}));
  EXPECT_EQ(average_ranks(vec({5, 5, 5})), vec({2, 2, 2}));
}

TEST(Spearman, MatchesRankFormulaOnTieFreeVectors) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> len(2, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    const Vec x = oracle::random_matrix(n, 1, rng);
    const Vec y = oracle::random_matrix(n, 1, rng);
    EXPECT_NEAR(spearman(x, y), oracle::spearman_rank_formula(x, y), 1e-12);
  }
}

TEST(Spearman, ErrorCases) {
  EXPECT_ERRC(spearman(vec({1, 1, 1}), vec({1, 2, 3})), Errc::ConstantInput);
  EXPECT_ERRC(spearman(vec({1}), vec({1})), Errc::ConstantInput);
  EXPECT_ERRC(spearman(vec({1, 2}), vec({1, 2, 3})), Errc::LengthMismatch);
}

TEST(SeedPlan, ConsecutiveSeeds) {
  const SeedPlan plan{7, 3};
  EXPECT_EQ(plan.seeds(), (std::vector<std::uint64_t>{7, 8, 9}));
  EXPECT_ERRC((SeedPlan{0, 0}.seeds()), Errc::ConfigViolation);
}

TEST(Sweep, ColumnsAndAggregation) {
  SweepResult r;
  EXPECT_ERRC(aggregate(r), Errc::EmptySweep);
  for (int c = 0; c < 5; ++c)
    for (int s = 0; s < 2; ++s) {
      SweepRow row;
      row.config_id = "c" + std::to_string(c);
      row.seed = static_cast<std::uint64_t>(s);
      row.err_w2s = c + 0.1 * s;
      row.norm_ps_ipw = 2.0 * c + s;
      row.norm_ps_ipw_ps = -c;
      row.theory_rhs = c * c;
      row.bound1 = c + 1.0;
      row.bound2 = c + 2.0;
      row.predgap = 0.5 * c;
      row.err_w = 3.0 * c;
      r.rows.push_back(row);
    }
  aggregate(r);
  ASSERT_EQ(r.aggregates.size(), 5u);
  EXPECT_NEAR(r.aggregates[2].err_w2s, 2.05, 1e-15);
  EXPECT_EQ(r.aggregates[2].seed, 2u);
  EXPECT_NEAR(r.spearman.at("norm_ps_ipw"), 1.0, 1e-15);
  EXPECT_NEAR(r.spearman.at("norm_ps_ipw_ps"), -1.0, 1e-15);
  EXPECT_EQ(r.spearman_per_seed.at("norm_ps_ipw").size(), 2u);
  EXPECT_ERRC(sweep_value(r.rows[0], "nope"), Errc::MissingColumn);
  EXPECT_EQ(sweep_columns().front(), "config_id");
}

TEST(PredGapHarness, NearPerfectWeakModelLeavesLittleToPropagate) {
  auto cfg = toy(0.99, 20000, 64, 4.0);
  const auto rep = run_thm31(cfg, SeedPlan{0, 3}, tiny_betas(cfg));
  for (const auto& row : rep.sweep.rows) EXPECT_LE(row.theory_rhs, 0.02);
}

TEST(PredGapHarness, RowsSatisfyMetricInvariants) {
  auto cfg = toy(0.6, 8000, 48, 4.0);
  const auto rep = run_thm31(cfg, SeedPlan{0, 4}, tiny_betas(cfg));
  ASSERT_EQ(rep.sweep.rows.size(), 4u);
  ASSERT_EQ(rep.abs_gap.size(), 4u);
  for (const auto& row : rep.sweep.rows) {
    EXPECT_LE(row.norm_ps_ipw_ps, row.norm_ps_ipw + 1e-10);
    EXPECT_LE(row.theory_rhs, row.bound1 + 1e-10);
    EXPECT_LE(row.theory_rhs, row.bound2 + 1e-10);
    EXPECT_TRUE(std::isfinite(row.predgap));
  }
}

TEST(Benign, RejectsUnsupportedConfigs) {
  auto cfg = toy(0.6, 1000, 16, 8.0);
  EXPECT_ERRC(run_benign(cfg, SeedPlan{0, 1}, Betas{1.0, 1.0}), Errc::ConfigViolation);
  cfg.eta_s = 0.5;
  EXPECT_ERRC(run_benign(cfg, SeedPlan{0, 1}, tiny_betas(cfg)), Errc::ConfigViolation);
}

TEST(Benign, SmallScaleDiagnosticsAreConsistent) {
  auto cfg = toy(0.6, 8000, 48, 4.0);
  const auto rep = run_benign(cfg, SeedPlan{0, 3}, tiny_betas(cfg));
  ASSERT_EQ(rep.coef_y.size(), 3u);
  EXPECT_LE(rep.max_train_mse_w2s, 0.02);
  EXPECT_LT(rep.mean_err_w2s, rep.mean_err_w);
}

TEST(Pythagoras, PreconditionEnforced) {
  auto cfg = toy(0.6, 2000, 128, 8.0);  // (beta + 8/128) / 1 > 0.05
  EXPECT_ERRC(run_pythagoras(cfg, SeedPlan{0, 1}, tiny_betas(cfg)), Errc::PreconditionRatioViolated);
}

TEST(Pythagoras, WeakEqualsCeilingDegenerateCase) {
  // A weak model whose first coordinate is the label and has no tail reproduces y^,
  // so the W2S head coincides with the ceiling.
  SpikedPairConfig pair;
  pair.weak.k = 1;
  pair.weak.d = 10;
  pair.weak.sigma2 = 0.0;
  pair.weak.label_coupling = {1.0};
  pair.weak.n_hat = pair.weak.n_tilde = 32;
  pair.weak.stream_tag = "weak";
  pair.strong = pair.weak;
  pair.strong.d = 400;
  pair.strong.sigma2 = 0.5;
  pair.strong.stream_tag = "strong";
  const auto rep = run_pythagoras(pair, SeedPlan{0, 3}, Betas{1e-8, 1e-8});
  for (std::size_t i = 0; i < rep.residual.size(); ++i) {
    const auto& row = rep.sweep.rows[i];
    EXPECT_LE(row.predgap, 1e-10);
    EXPECT_NEAR(rep.residual[i], std::abs(row.err_w2s - row.err_sc), 1e-10);
    EXPECT_LE(rep.residual[i], 1e-6);
  }
}

TEST(MetricSweep, GridRequirements) {
  auto cfg = toy(0.5, 1000, 16, 4.0);
  EXPECT_ERRC(run_metric_sweep(cfg, {0.1, 0.2, 0.3, 0.4}, SeedPlan{0, 1}, tiny_betas(cfg), pca_projection(cfg)),
              Errc::ConfigViolation);
  EXPECT_ERRC(run_metric_sweep(cfg, std::vector<double>(5, 0.5), SeedPlan{0, 2}, tiny_betas(cfg), pca_projection(cfg)),
              Errc::ConstantInput);
}

TEST(MetricSweep, ShapeInvariantsAndMonotoneError) {
  auto cfg = toy(0.5, 4000, 32, 4.0);
  const auto rep = run_metric_sweep(cfg, kGrid, SeedPlan{0, 20}, tiny_betas(cfg), pca_projection(cfg));
  ASSERT_EQ(rep.sweep.rows.size(), kGrid.size() * 20);
  for (const auto& row : rep.sweep.rows) EXPECT_LE(row.norm_ps_ipw_ps, row.norm_ps_ipw + 1e-10);
  for (const auto& [name, rho] : rep.sweep.spearman) {
    EXPECT_GE(rho, -1.0);
    EXPECT_LE(rho, 1.0);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < rep.sweep.aggregates.size(); ++i)
    inversions += rep.sweep.aggregates[i].err_w2s > rep.sweep.aggregates[i - 1].err_w2s;
  EXPECT_LE(inversions, 1);
}

TEST(MetricSweep, PcaAndAnalyticModesAgreeInRankOrder) {
  auto cfg = toy(0.5, 4000, 32, 4.0);
  auto pca = pca_projection(cfg);
  auto analytic = pca;
  analytic.mode = SubspaceSource::analytic;
  const auto a = run_metric_sweep(cfg, kGrid, SeedPlan{0, 10}, tiny_betas(cfg), pca);
  const auto b = run_metric_sweep(cfg, kGrid, SeedPlan{0, 10}, tiny_betas(cfg), analytic);
  for (const std::string col : {"norm_ps_ipw", "norm_ps_ipw_ps"}) {
    Vec x(static_cast<Index>(kGrid.size())), y(static_cast<Index>(kGrid.size()));
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      x(static_cast<Index>(i)) = sweep_value(a.sweep.aggregates[i], col);
      y(static_cast<Index>(i)) = sweep_value(b.sweep.aggregates[i], col);
    }
    EXPECT_GE(spearman(x, y), 0.95) << col;
  }
}

TEST(Reproducibility, SweepsAreBitIdentical) {
  auto cfg = toy(0.5, 2000, 24, 4.0);
  const auto a = run_metric_sweep(cfg, {0.1, 0.3, 0.5, 0.7, 0.9}, SeedPlan{3, 2}, tiny_betas(cfg), pca_projection(cfg));
  const auto b = run_metric_sweep(cfg, {0.1, 0.3, 0.5, 0.7, 0.9}, SeedPlan{3, 2}, tiny_betas(cfg), pca_projection(cfg));
  ASSERT_EQ(a.sweep.rows.size(), b.sweep.rows.size());
  for (std::size_t i = 0; i < a.sweep.rows.size(); ++i)
    for (const auto& col : sweep_columns()) {
      if (col == "config_id") continue;
      EXPECT_EQ(sweep_value(a.sweep.rows[i], col), sweep_value(b.sweep.rows[i], col)) << col;
    }
  auto t = toy(0.6, 2000, 24, 4.0);
  const auto x = run_thm31(t, SeedPlan{5, 2}, tiny_betas(t));
  const auto y = run_thm31(t, SeedPlan{5, 2}, tiny_betas(t));
  EXPECT_EQ(x.abs_gap, y.abs_gap);
}
