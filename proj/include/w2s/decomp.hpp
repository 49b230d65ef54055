#pragma once

// Diagnostics for the decomposability conditions (a)-(e) of a dataset against
// a candidate principal subspace. Magnitudes are reported, never judged.

#include <optional>

#include "w2s/projection.hpp"

namespace w2s {

struct DecompParams {
  double delta = 0.0;
  double gamma_hat = 0.0;
  double gamma_tilde = 0.0;
  double gamma = 0.0;  // min(gamma_hat, gamma_tilde)
  double rho = 0.0;    // smallest nonzero eigenvalue of the principal covariance

  void validate() const;
};

/// gamma = (tail energy) / n from the population summary's isotropic tail,
/// delta = 0, rho from the analytic principal covariance.
DecompParams gamma_from_config(const RepDataset& ds);

struct BoundsDiag {
  double sigma_norm = 0.0;
  double sigma_hat_norm = 0.0;
  double sigma_tilde_norm = 0.0;
  double e_y2 = 0.0;
  double mean_y_hat2 = 0.0;
  double mean_y_tilde2 = 0.0;
};

struct ConcentrationDiag {
  double cov_hat = 0.0;     // ||Sigma^'(hat) - Sigma'||
  double cov_tilde = 0.0;
  double cross_hat = 0.0;   // ||(1/n) sum Pi_V r_i y_i - E[Pi_V r y]||
  double cross_tilde = 0.0;
};

struct IsotropyDiag {
  double hat = 0.0;    // ||K''^/n - gamma^ I||
  double tilde = 0.0;
  double max() const { return std::max(hat, tilde); }
};

/// Comparison scales from the parameters and magnitude / scale ratios (absent when the scale is 0).
struct DecompScales {
  double concentration_cov = 0.0;    // gamma^2 + delta^2 + rho^2
  double concentration_cross = 0.0;  // gamma + delta + rho
  double isotropy = 0.0;             // gamma^2 + delta^2
  double cross = 0.0;                // gamma + delta
  double tail = 0.0;                 // gamma + delta
};

struct DecompRatios {
  std::optional<double> concentration_cov;
  std::optional<double> concentration_cross;
  std::optional<double> isotropy;
  std::optional<double> cross;
  std::optional<double> tail;
};

struct DecompReport {
  BoundsDiag a_bounds;
  ConcentrationDiag b_concentration;
  IsotropyDiag c_isotropy;
  double d_cross = 0.0;
  double e_tail = 0.0;
  DecompParams params;
  DecompScales scales;
  DecompRatios ratios;
  bool population_estimated = false;
};

/// `population` overrides the dataset's summary (e.g. a Monte-Carlo estimate).
DecompReport decomposability_report(const RepDataset& ds, const PrincipalSubspace& subspace,
                                    const DecompParams& params, const PopulationSummary* population = nullptr);

/// ||Sigma(Pi_{V-perp} h)||_op from the block structure, without forming Sigma.
double tail_population_norm(const PopulationSummary& pop, const Mat& basis);

}  // namespace w2s
