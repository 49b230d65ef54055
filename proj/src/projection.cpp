#include "w2s/projection.hpp"

#include <cmath>

namespace w2s {
namespace {

// Eigenvalues at or below this fraction of the largest are numerical zeros.
constexpr double kRelativeZero = 1e-12;

Mat maybe_bias(const Mat& reps, bool bias) { return bias ? with_bias_row(reps) : reps; }

// Thin orthonormal factor of `u` with columns kept close to the originals.
Mat orthonormalize(const Mat& u) {
  Eigen::HouseholderQR<Mat> qr(u);
  Mat q = qr.householderQ() * Mat::Identity(u.rows(), u.cols());
  const Mat r = qr.matrixQR().topRows(u.cols()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < u.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

const char* to_string(SubspaceSource source) noexcept {
  switch (source) {
    case SubspaceSource::analytic: return "analytic";
    case SubspaceSource::pca_threshold: return "pca";
    case SubspaceSource::variance_threshold: return "variance";
  }
  return "analytic";
}

SubspaceSource subspace_source_from_string(const std::string& name) {
  if (name == "analytic") return SubspaceSource::analytic;
  if (name == "pca" || name == "pca_threshold") return SubspaceSource::pca_threshold;
  if (name == "variance" || name == "variance_threshold") return SubspaceSource::variance_threshold;
  throw Error(Errc::ConfigViolation, "unknown projection mode '" + name + "'");
}

PrincipalSubspace select_pca(const Mat& reps_in, double alpha, bool bias) {
  if (!(alpha >= 0 && alpha <= 1)) throw Error(Errc::ConfigViolation, "alpha must lie in [0, 1]");
  if (reps_in.cols() < 2) throw Error(Errc::DegenerateData, "PCA selection needs at least two samples");
  const Mat reps = maybe_bias(reps_in, bias);
  const Index d = reps.rows();
  const Index n = reps.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool via_gram = d > n;
  const Mat second = via_gram ? Mat(inv_n * reps.transpose() * reps) : Mat(inv_n * reps * reps.transpose());
  const auto eig = sym_eig(second);
  const double top = eig.values(0);
  if (!(top > 0)) throw Error(Errc::DegenerateData, "representations have zero second moment");

  Index keep = 0;
  while (keep < eig.values.size() && eig.values(keep) >= alpha * top && eig.values(keep) > kRelativeZero * top) ++keep;
  if (keep == 0) throw Error(Errc::EmptySubspace, "no eigenvalue reaches alpha * largest");

  Mat basis;
  if (via_gram) {
    // u_i = R v_i / sqrt(n lambda_i) are the unit eigenvectors of R R^T / n.
    const Vec scale = (eig.values.head(keep) * static_cast<double>(n)).cwiseSqrt().cwiseInverse();
    basis = orthonormalize(reps * eig.vectors.leftCols(keep) * scale.asDiagonal());
    canonicalize_signs(basis);
  } else {
    basis = eig.vectors.leftCols(keep);
  }
  return {std::move(basis), SubspaceSource::pca_threshold, alpha, bias};
}

PrincipalSubspace select_variance(const Mat& reps_in, double alpha, bool bias) {
  if (!(alpha >= 0 && alpha <= 1)) throw Error(Errc::ConfigViolation, "alpha must lie in [0, 1]");
  if (reps_in.cols() < 2) throw Error(Errc::DegenerateData, "variance selection needs at least two samples");
  const Mat reps = maybe_bias(reps_in, bias);
  const Vec moment = reps.rowwise().squaredNorm() / static_cast<double>(reps.cols());
  const double top = moment.maxCoeff();
  if (!(top > 0)) throw Error(Errc::DegenerateData, "representations have zero second moment");
  std::vector<Index> kept;
  for (Index i = 0; i < moment.size(); ++i)
    if (moment(i) >= alpha * top && moment(i) > 0) kept.push_back(i);
  if (kept.empty()) throw Error(Errc::EmptySubspace, "no coordinate reaches alpha * largest");
  Mat basis = Mat::Zero(reps.rows(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) basis(kept[j], static_cast<Index>(j)) = 1.0;
  return {std::move(basis), SubspaceSource::variance_threshold, alpha, bias};
}

PrincipalSubspace select_analytic(const PopulationSummary& pop) {
  if (pop.principal_basis.cols() < 1) throw Error(Errc::EmptySubspace, "population has an empty principal subspace");
  return {pop.principal_basis, SubspaceSource::analytic, 0.0, false};
}

PrincipalSubspace principal_subspace_select(const RepDataset& ds, SubspaceSource mode, double alpha, bool bias) {
  switch (mode) {
    case SubspaceSource::analytic:
      if (!ds.population) throw Error(Errc::MissingPopulation, "analytic subspace needs a population summary");
      if (bias) throw Error(Errc::ConfigViolation, "analytic subspaces do not support the bias coordinate");
      return select_analytic(*ds.population);
    case SubspaceSource::pca_threshold:
      return select_pca(ds.hat.reps, alpha, bias);
    case SubspaceSource::variance_threshold:
      return select_variance(ds.hat.reps, alpha, bias);
  }
  throw Error(Errc::ConfigViolation, "unknown subspace mode");
}

Mat kernel_matrix(const Mat& reps) {
  require_finite(reps, "representations");
  Mat k = Mat::Zero(reps.cols(), reps.cols());
  k.selfadjointView<Eigen::Lower>().rankUpdate(reps.transpose());
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return psd_clamp(k, 1e-10 * std::max(1.0, k.cwiseAbs().maxCoeff()));
}

Mat kernel_matrix(const Mat& reps, const PrincipalSubspace& subspace) {
  const Index expected = subspace.ambient_dim() - (subspace.bias_appended ? 1 : 0);
  if (reps.rows() != expected)
    throw Error(Errc::DimensionMismatch, "representations do not live in the subspace's ambient space");
  const Mat coords = subspace.bias_appended ? Mat(subspace.basis.transpose() * with_bias_row(reps))
                                            : Mat(subspace.basis.transpose() * reps);
  return kernel_matrix(coords);
}

ProjectionOperator build_P(const Mat& principal_kernel, double eff_reg, Side side) {
  if (!(eff_reg > 0) || !std::isfinite(eff_reg))
    throw Error(Errc::ConfigViolation, "effective regularization must be positive");
  const Index n = principal_kernel.rows();
  if (n < 1) throw Error(Errc::DimensionMismatch, "empty kernel");
  auto eig = sym_eig(Mat(principal_kernel / static_cast<double>(n)));
  const double top = std::max(1.0, std::abs(eig.values(0)));
  if (eig.values.minCoeff() < -1e-10 * top) throw Error(Errc::NonPSD, "principal kernel is not positive semidefinite");
  ProjectionOperator p;
  p.eff_reg = eff_reg;
  p.side = side;
  p.spectrum = eig.values.cwiseMax(0.0).unaryExpr([eff_reg](double l) { return l / (l + eff_reg); });
  p.matrix = eig.vectors * p.spectrum.asDiagonal() * eig.vectors.transpose();
  p.matrix = (p.matrix + p.matrix.transpose()) / 2;
  return p;
}

ProjectionOperator projection_from_subspace(const Mat& hat_reps, const PrincipalSubspace& subspace, double eff_reg,
                                            Side side) {
  return build_P(kernel_matrix(hat_reps, subspace), eff_reg, side);
}

namespace {

void require_size(const ProjectionOperator& p, const Vec& y) {
  if (p.size() != y.size()) throw Error(Errc::DimensionMismatch, "projection and label vector sizes differ");
}

}  // namespace

Vec weak_error_vector(const ProjectionOperator& pw, const Vec& y_hat) {
  require_size(pw, y_hat);
  const Vec u = y_hat / std::sqrt(static_cast<double>(y_hat.size()));
  return u - pw.matrix * u;
}

double theory_predgap_rhs(const ProjectionOperator& ps, const ProjectionOperator& pw, const Vec& y_hat) {
  require_size(ps, y_hat);
  return (ps.matrix * weak_error_vector(pw, y_hat)).squaredNorm();
}

MetricReport w2s_metrics(const ProjectionOperator& ps, const ProjectionOperator& pw, const Vec& y_hat,
                         std::optional<double> err_sc) {
  require_size(ps, y_hat);
  require_size(pw, y_hat);
  const Index n = y_hat.size();
  const Mat ps_ipw = ps.matrix - ps.matrix * pw.matrix;
  MetricReport r;
  r.theory_rhs = theory_predgap_rhs(ps, pw, y_hat);
  r.norm_ps_ipw = operator_norm(ps_ipw);
  r.norm_ps_ipw_ps = operator_norm(Mat(ps_ipw * ps.matrix));
  r.C = y_hat.squaredNorm() / static_cast<double>(n);
  r.degenerate_labels = r.C == 0.0;
  r.bound1 = r.C * r.norm_ps_ipw * r.norm_ps_ipw;
  if (err_sc) {
    const double root = std::sqrt(r.C) * r.norm_ps_ipw_ps + std::sqrt(std::max(0.0, *err_sc));
    r.bound2 = root * root;
    r.err_sc = *err_sc;
  }
  return r;
}

}  // namespace w2s
