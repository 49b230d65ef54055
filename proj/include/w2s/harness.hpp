#pragma once

// Seeded experiment drivers: the PredGap characterization, benign overfitting,
// the error decomposition and the metric-vs-error sweep.

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "w2s/decomp.hpp"
#include "w2s/projection.hpp"

namespace w2s {

/// Average ranks (1-based), ties share the mean of their positions.
Vec average_ranks(const Vec& x);

/// Pearson correlation of the average-rank vectors.
double spearman(const Vec& x, const Vec& y);

/// Weak and strong spiked models over the same samples: same seed and sizes,
/// different stream tags, so labels coincide while noise differs.
struct SpikedPairConfig {
  SpikedConfig weak;
  SpikedConfig strong;

  void validate() const;
};

using PairConfig = std::variant<ToyPairConfig, SpikedPairConfig>;

struct GeneratedPair {
  RepDataset weak;
  RepDataset strong;
  std::optional<Vec> hat_zeta;  // toy only
};

GeneratedPair generate_pair(const PairConfig& cfg, std::uint64_t seed);

struct Betas {
  double beta_w = 0.0;
  double beta_s = 0.0;
};

struct SeedPlan {
  std::uint64_t master = 0;
  Index count = 20;

  std::vector<std::uint64_t> seeds() const;  // master, master + 1, ...
};

struct SweepRow {
  std::string config_id;
  std::uint64_t seed = 0;
  double err_w = 0.0;
  double err_w2s = 0.0;
  double err_sc = 0.0;
  double predgap = 0.0;
  double theory_rhs = 0.0;
  double norm_ps_ipw = 0.0;
  double norm_ps_ipw_ps = 0.0;
  double bound1 = 0.0;
  double bound2 = 0.0;
  double train_mse_w2s = 0.0;
};

/// Column names of SweepRow, in CSV order.
const std::vector<std::string>& sweep_columns();
/// Numeric value of a named SweepRow column.
double sweep_value(const SweepRow& row, const std::string& column);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepRow> aggregates;  // per config_id means, seed field = row count
  // Spearman rho between each metric column and err_w2s, computed across
  // configs within each seed and averaged over seeds. Empty for single-config runs.
  std::map<std::string, double> spearman;
  std::map<std::string, std::vector<double>> spearman_per_seed;
};

/// Fills aggregates and spearman from rows (rows stay in insertion order).
void aggregate(SweepResult& result);

const std::vector<std::string>& metric_columns();

struct Thm31Report {
  SweepResult sweep;
  std::vector<double> abs_gap;  // |predgap - theory_rhs| per seed
  double mean_abs_gap = 0.0;
  double max_bound1_excess = 0.0;  // max over seeds of predgap - bound1
  double max_bound2_excess = 0.0;
};

Thm31Report run_thm31(const PairConfig& cfg, const SeedPlan& seeds, const Betas& betas);

struct BenignReport {
  SweepResult sweep;
  std::vector<double> err_w_hat;          // weak head's MSE on the W2S split
  std::vector<double> coef_y;             // <eps_w, y^>/||y^||^2, eps_w = (I - P_w) y^ / sqrt(n)
  std::vector<double> coef_zeta;          // <eps_w, zeta^>/||zeta^||^2
  std::vector<double> realized_coef_y;    // same with eps_w = (y^ - f_w(R^_w)) / sqrt(n)
  std::vector<double> realized_coef_zeta;
  double mean_err_w = 0.0;
  double mean_err_w_hat = 0.0;
  double mean_err_w2s = 0.0;
  double mean_err_sc = 0.0;
  double max_train_mse_w2s = 0.0;
  double mean_delta = 0.0;  // err_w - theory_rhs
  double mean_coef_y = 0.0;
  double mean_coef_zeta = 0.0;
  double mean_realized_coef_y = 0.0;
  double mean_realized_coef_zeta = 0.0;
};

/// Requires eta_s = 1 and both betas <= 0.01 sigma^2 / n_hat.
BenignReport run_benign(const ToyPairConfig& cfg, const SeedPlan& seeds, const Betas& betas);

struct PythagorasReport {
  SweepResult sweep;
  double precondition_ratio = 0.0;  // (beta_s + gamma^_s) / rho_s
  std::vector<double> residual;     // |err_w2s - (predgap + err_sc)|
  std::vector<double> triangle_slack;  // sqrt(predgap) + sqrt(err_sc) - sqrt(err_w2s)
  double mean_residual = 0.0;
  double min_triangle_slack = 0.0;
};

constexpr double kMaxPreconditionRatio = 0.05;

PythagorasReport run_pythagoras(const PairConfig& cfg, const SeedPlan& seeds, const Betas& betas);

struct EmpiricalProjection {
  SubspaceSource mode = SubspaceSource::pca_threshold;
  double alpha_w = 0.1;
  double alpha_s = 0.1;
  double beta_eff_w = 0.0;
  double beta_eff_s = 0.0;
  bool bias = false;
};

struct MetricSweepReport {
  SweepResult sweep;
  std::vector<double> weak_grid;
  double mean_rho_norm_ps_ipw = 0.0;
  double mean_rho_norm_ps_ipw_ps = 0.0;
};

/// Fixed strong model per seed, weak eta varied over `weak_grid` on the same samples.
MetricSweepReport run_metric_sweep(const ToyPairConfig& strong_cfg, const std::vector<double>& weak_grid,
                                   const SeedPlan& seeds, const Betas& betas, const EmpiricalProjection& proj);

}  // namespace w2s
