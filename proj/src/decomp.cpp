#include "w2s/decomp.hpp"

#include <algorithm>
#include <cmath>

namespace w2s {
namespace {

constexpr double kRelativeZero = 1e-12;

double mean_square(const Vec& v) { return v.size() ? v.squaredNorm() / static_cast<double>(v.size()) : 0.0; }

double sample_cov_norm(const Mat& reps) {
  const double s = operator_norm(reps);
  return s * s / static_cast<double>(reps.cols());
}

// Kernel of the V-perp components: R^T R - (U^T R)^T (U^T R); zero when V is the whole space.
Mat complement_kernel(const Mat& a, const Mat& ca, const Mat& b, const Mat& cb, bool full) {
  if (full) return Mat::Zero(a.cols(), b.cols());
  return a.transpose() * b - ca.transpose() * cb;
}

// Symmetric square root of a PSD matrix, negative rounding clamped to zero.
Mat psd_sqrt(const Mat& a) {
  const auto eig = sym_eig(a);
  return eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.vectors.transpose();
}

// ||K'' / n - g I||. When d < n the nonzero spectrum of K''/n is that of the
// d x d complement second moment, and K''/n also has the eigenvalue 0.
double isotropy(const Mat& reps, const Mat& u, const Mat& coords, double gamma, bool full) {
  const auto n = static_cast<double>(reps.cols());
  if (full) return std::abs(gamma);
  if (reps.rows() < reps.cols()) {
    const Mat c = reps - u * coords;
    Mat m = Mat::Zero(c.rows(), c.rows());
    m.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0 / n);
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    const Vec ev = sym_eigenvalues(m);
    return std::max({std::abs(ev(0) - gamma), std::abs(ev(ev.size() - 1) - gamma), std::abs(gamma)});
  }
  Mat k = Mat::Zero(reps.cols(), reps.cols());
  k.selfadjointView<Eigen::Lower>().rankUpdate(reps.transpose(), 1.0 / n);
  k.selfadjointView<Eigen::Lower>().rankUpdate(coords.transpose(), -1.0 / n);
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  k.diagonal().array() -= gamma;
  const Vec ev = sym_eigenvalues(k);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// ||C_a^T C_b|| / sqrt(n_a n_b) for the V-perp components C. When d is below
// both sample sizes this equals ||A^{1/2} B^{1/2}|| with A = C_a C_a^T, B = C_b C_b^T.
double cross_norm(const Mat& a, const Mat& ca, const Mat& b, const Mat& cb, const Mat& u, bool full) {
  if (full) return 0.0;
  const double scale = std::sqrt(static_cast<double>(a.cols()) * static_cast<double>(b.cols()));
  if (a.rows() < std::min(a.cols(), b.cols())) {
    const Mat pa = a - u * ca;
    const Mat pb = b - u * cb;
    return operator_norm(Mat(psd_sqrt(pa * pa.transpose()) * psd_sqrt(pb * pb.transpose()))) / scale;
  }
  return operator_norm(complement_kernel(a, ca, b, cb, full)) / scale;
}

std::optional<double> ratio(double value, double scale) {
  if (!(scale > 0)) return std::nullopt;
  return value / scale;
}

}  // namespace

void DecompParams::validate() const {
  if (!(delta >= 0) || !(gamma_hat >= 0) || !(gamma_tilde >= 0) || !(rho >= 0))
    throw Error(Errc::ConfigViolation, "decomposability parameters must be nonnegative");
  if (gamma != std::min(gamma_hat, gamma_tilde))
    throw Error(Errc::ConfigViolation, "gamma must equal min(gamma_hat, gamma_tilde)");
}

DecompParams gamma_from_config(const RepDataset& ds) {
  if (!ds.population) throw Error(Errc::MissingPopulation, "dataset has no population summary");
  const auto& pop = *ds.population;
  const double energy = static_cast<double>(pop.tail_dim) * pop.tail_variance;
  DecompParams p;
  p.gamma_hat = ds.hat.size() > 0 ? energy / static_cast<double>(ds.hat.size()) : 0.0;
  p.gamma_tilde = ds.tilde.size() > 0 ? energy / static_cast<double>(ds.tilde.size()) : 0.0;
  p.gamma = std::min(p.gamma_hat, p.gamma_tilde);
  if (pop.principal_basis.cols() > 0) {
    const Mat& u = pop.principal_basis;
    const Vec ev = sym_eigenvalues(Mat(u.transpose() * pop.apply(u)));
    const double top = ev(0);
    for (Index i = ev.size() - 1; i >= 0; --i) {
      if (ev(i) > kRelativeZero * std::max(1.0, top)) {
        p.rho = ev(i);
        break;
      }
    }
  }
  return p;
}

double tail_population_norm(const PopulationSummary& pop, const Mat& basis) {
  const Index d = pop.dim();
  const Index complement = d - basis.cols();
  if (complement <= 0) return 0.0;
  // Sigma = t I + W D W^T; on V-perp this is t I + X D X^T with X = (I - U U^T) W.
  Index m = 0;
  for (const auto& b : pop.blocks) m += b.basis.cols();
  const double t = pop.tail_dim > 0 ? pop.tail_variance : 0.0;
  if (m == 0) return t;
  Mat w(d, m);
  Vec diag(m);
  Index at = 0;
  for (const auto& b : pop.blocks) {
    w.middleCols(at, b.basis.cols()) = b.basis;
    diag.segment(at, b.basis.cols()).setConstant(b.eigenvalue - t);
    at += b.basis.cols();
  }
  const Mat x = w - basis * (basis.transpose() * w);
  Eigen::ColPivHouseholderQR<Mat> qr(x);
  qr.setThreshold(1e-12);
  const Index rank = qr.rank();
  double top = complement > rank ? t : 0.0;
  if (rank > 0) {
    // X P = Q R, so X D X^T = Q (R P^T D P R^T) Q^T on the first `rank` columns of Q.
    const Mat r = qr.matrixR().topRows(rank).triangularView<Eigen::Upper>();
    const auto perm = qr.colsPermutation();
    const Vec d_perm = perm.transpose() * diag;
    Mat inner = r * d_perm.asDiagonal() * r.transpose();
    inner.diagonal().array() += t;
    top = std::max(top, sym_eigenvalues(Mat((inner + inner.transpose()) / 2))(0));
  }
  return std::max(0.0, top);
}

DecompReport decomposability_report(const RepDataset& ds, const PrincipalSubspace& subspace,
                                    const DecompParams& params, const PopulationSummary* population) {
  params.validate();
  if (subspace.bias_appended || subspace.ambient_dim() != ds.dim)
    throw Error(Errc::DimensionMismatch, "subspace does not live in the dataset's representation space");
  if (ds.hat.size() == 0 || ds.tilde.size() == 0)
    throw Error(Errc::DimensionMismatch, "both finetuning splits are required");
  const PopulationSummary* pop = population ? population : (ds.population ? &*ds.population : nullptr);
  if (!pop) throw Error(Errc::MissingPopulation, "no population summary or estimate supplied");
  if (pop->dim() != ds.dim) throw Error(Errc::DimensionMismatch, "population dimension differs from dataset");

  const Mat& u = subspace.basis;
  const Mat& rh = ds.hat.reps;
  const Mat& rt = ds.tilde.reps;
  const auto nh = static_cast<double>(ds.hat.size());
  const auto nt = static_cast<double>(ds.tilde.size());
  const Mat ch = u.transpose() * rh;
  const Mat ct = u.transpose() * rt;

  DecompReport rep;
  rep.params = params;
  rep.population_estimated = pop->estimated;

  auto& a = rep.a_bounds;
  a.sigma_norm = pop->norm();
  a.sigma_hat_norm = sample_cov_norm(rh);
  a.sigma_tilde_norm = sample_cov_norm(rt);
  a.e_y2 = pop->e_y2;
  a.mean_y_hat2 = mean_square(ds.hat.labels);
  a.mean_y_tilde2 = mean_square(ds.tilde.labels);

  auto& b = rep.b_concentration;
  const Mat sigma_v = u.transpose() * pop->apply(u);
  const Vec ery_v = u.transpose() * pop->e_ry;
  b.cov_hat = operator_norm(Mat(ch * ch.transpose() / nh - sigma_v));
  b.cov_tilde = operator_norm(Mat(ct * ct.transpose() / nt - sigma_v));
  b.cross_hat = (ch * ds.hat.labels / nh - ery_v).norm();
  b.cross_tilde = (ct * ds.tilde.labels / nt - ery_v).norm();

  const bool full = subspace.rank() >= ds.dim;
  rep.c_isotropy.hat = isotropy(rh, u, ch, params.gamma_hat, full);
  rep.c_isotropy.tilde = isotropy(rt, u, ct, params.gamma_tilde, full);
  rep.d_cross = cross_norm(rh, ch, rt, ct, u, full);
  rep.e_tail = tail_population_norm(*pop, u);

  const double g = params.gamma;
  const double dl = params.delta;
  const double r = params.rho;
  auto& s = rep.scales;
  s.concentration_cov = g * g + dl * dl + r * r;
  s.concentration_cross = g + dl + r;
  s.isotropy = g * g + dl * dl;
  s.cross = g + dl;
  s.tail = g + dl;
  auto& q = rep.ratios;
  q.concentration_cov = ratio(std::max(b.cov_hat, b.cov_tilde), s.concentration_cov);
  q.concentration_cross = ratio(std::max(b.cross_hat, b.cross_tilde), s.concentration_cross);
  q.isotropy = ratio(rep.c_isotropy.max(), s.isotropy);
  q.cross = ratio(rep.d_cross, s.cross);
  q.tail = ratio(rep.e_tail, s.tail);
  return rep;
}

}  // namespace w2s
