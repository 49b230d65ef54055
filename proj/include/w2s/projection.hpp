#pragma once

// Principal subspaces, principal kernels, the scaled projections P_w / P_s and
// the label-free metrics built from them.

#include <optional>
#include <string>

#include "w2s/datagen.hpp"
#include "w2s/finetune.hpp"

namespace w2s {

enum class SubspaceSource { analytic, pca_threshold, variance_threshold };

const char* to_string(SubspaceSource source) noexcept;
SubspaceSource subspace_source_from_string(const std::string& name);

/// Orthonormal basis U' (columns) of a principal subspace V.
struct PrincipalSubspace {
  Mat basis;
  SubspaceSource source = SubspaceSource::analytic;
  double alpha = 0.0;
  bool bias_appended = false;  // the basis lives in R^{d+1}, last coordinate = constant 1

  Index ambient_dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
};

/// Eigenvectors of the empirical second-moment matrix R R^T / n with eigenvalue
/// >= alpha * (largest eigenvalue). Uses the n x n Gram matrix when d > n.
PrincipalSubspace select_pca(const Mat& reps, double alpha, bool bias = false);

/// Coordinates whose second moment is >= alpha * (largest coordinate second moment).
PrincipalSubspace select_variance(const Mat& reps, double alpha, bool bias = false);

/// The true principal subspace recorded by a generator.
PrincipalSubspace select_analytic(const PopulationSummary& pop);

/// Dispatches on `mode`; data-driven modes use the hat split.
PrincipalSubspace principal_subspace_select(const RepDataset& ds, SubspaceSource mode, double alpha, bool bias);

Mat kernel_matrix(const Mat& reps);
/// Kernel of the projected representations Pi_V r (principal kernel).
Mat kernel_matrix(const Mat& reps, const PrincipalSubspace& subspace);

enum class Side { weak, strong };

/// P = (K/n)(K/n + eff_reg I)^{-1}, symmetric with spectrum in [0, 1).
struct ProjectionOperator {
  Mat matrix;
  double eff_reg = 0.0;
  Side side = Side::weak;
  Vec spectrum;  // eigenvalues of P, descending

  Index size() const { return matrix.rows(); }
};

ProjectionOperator build_P(const Mat& principal_kernel, double eff_reg, Side side);

/// P from a principal subspace of the hat-split representations.
ProjectionOperator projection_from_subspace(const Mat& hat_reps, const PrincipalSubspace& subspace, double eff_reg,
                                            Side side);

/// (I - P_w) y^ / sqrt(n).
Vec weak_error_vector(const ProjectionOperator& pw, const Vec& y_hat);

/// ||P_s (I - P_w) y^ / sqrt(n)||^2.
double theory_predgap_rhs(const ProjectionOperator& ps, const ProjectionOperator& pw, const Vec& y_hat);

struct MetricReport {
  std::optional<Estimate> predgap;
  double theory_rhs = 0.0;
  double norm_ps_ipw = 0.0;
  double norm_ps_ipw_ps = 0.0;
  double bound1 = 0.0;
  std::optional<double> bound2;
  double C = 0.0;
  std::optional<double> err_w;
  std::optional<double> err_w2s;
  std::optional<double> err_sc;
  bool degenerate_labels = false;  // y^ = 0: metrics are defined but carry no signal
};

MetricReport w2s_metrics(const ProjectionOperator& ps, const ProjectionOperator& pw, const Vec& y_hat,
                         std::optional<double> err_sc = std::nullopt);

}  // namespace w2s
