#include "w2s/finetune.hpp"

#include <cmath>

namespace w2s {

const char* to_string(HeadRole role) noexcept {
  switch (role) {
    case HeadRole::weak: return "weak";
    case HeadRole::w2s: return "w2s";
    case HeadRole::ceiling: return "ceiling";
  }
  return "weak";
}

Mat with_bias_row(const Mat& reps) {
  Mat out(reps.rows() + 1, reps.cols());
  out.topRows(reps.rows()) = reps;
  out.bottomRows(1).setOnes();
  return out;
}

namespace {

constexpr double kPinvCutoff = 1e-10;

// a^T a, lower triangle via a rank update then mirrored.
Mat gram(const Mat& a) {
  Mat g = Mat::Zero(a.cols(), a.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

}  // namespace

RidgeSolver::RidgeSolver(const Mat& reps, double beta, const FitOptions& opts)
    : reps_(&reps), beta_(beta), opts_(opts), dual_(false) {
  require_finite(reps, "representations");
  if (!std::isfinite(beta) || beta < 0) throw Error(Errc::ConfigViolation, "beta must be a nonnegative finite number");
  if (opts.bias) {
    owned_ = with_bias_row(reps);
    reps_ = &owned_;
  }
  const Mat& r = *reps_;
  const Index d = r.rows();
  const Index n = r.cols();
  if (n < 1) throw Error(Errc::DimensionMismatch, "need at least one sample");
  dual_ = opts.path == SolvePath::dual || (opts.path == SolvePath::automatic && d > n);

  Mat system = dual_ ? gram(r) : gram(r.transpose().eval());
  system /= static_cast<double>(n);
  if (opts.pinv) {
    eig_ = sym_eig(system);
    return;
  }
  if (beta == 0) throw Error(Errc::SingularSystem, "beta = 0 requires pseudo-inverse mode");
  system.diagonal().array() += beta;
  ldlt_.compute(system);
  if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive() || ldlt_.rcond() < 1e-15)
    throw Error(Errc::SingularSystem, "ridge system is numerically singular");
}

Vec RidgeSolver::solve_system(const Vec& rhs) const {
  if (!opts_.pinv) return ldlt_.solve(rhs);
  Vec inv(eig_.values.size());
  for (Index i = 0; i < inv.size(); ++i) {
    const double lambda = std::max(0.0, eig_.values(i)) + beta_;
    inv(i) = lambda < kPinvCutoff ? 0.0 : 1.0 / lambda;
  }
  return eig_.vectors * (inv.asDiagonal() * (eig_.vectors.transpose() * rhs));
}

RidgeHead RidgeSolver::fit(const Vec& targets) const { return fit(targets, opts_.role); }

RidgeHead RidgeSolver::fit(const Vec& targets, HeadRole role) const {
  const Mat& r = *reps_;
  if (targets.size() != r.cols()) throw Error(Errc::DimensionMismatch, "targets length does not match samples");
  require_finite(targets, "targets");
  const double inv_n = 1.0 / static_cast<double>(r.cols());
  RidgeHead head;
  head.beta = beta_;
  head.bias = opts_.bias;
  head.role = role;
  if (dual_)
    head.weights = r * solve_system(inv_n * targets);
  else
    head.weights = solve_system(inv_n * (r * targets));
  require_finite(head.weights, "ridge weights");
  return head;
}

RidgeHead fit_head(const Mat& reps, const Vec& targets, double beta, const FitOptions& opts) {
  return RidgeSolver(reps, beta, opts).fit(targets);
}

Vec predict(const RidgeHead& head, const Mat& reps) {
  if (reps.rows() != head.input_dim())
    throw Error(Errc::DimensionMismatch, "head expects " + std::to_string(head.input_dim()) + " features, got " +
                                             std::to_string(reps.rows()));
  Vec out = reps.transpose() * head.linear();
  if (head.bias) out.array() += head.bias_weight();
  return out;
}

double empirical_mse(const Vec& preds, const Vec& targets) {
  if (preds.size() != targets.size()) throw Error(Errc::LengthMismatch, "prediction and target lengths differ");
  if (preds.size() == 0) return 0.0;
  return (preds - targets).squaredNorm() / static_cast<double>(preds.size());
}

namespace {

Estimate mean_with_error(const Eigen::ArrayXd& values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() == 0) throw Error(Errc::MissingTestSplit, "test split is empty");
  Estimate e;
  e.value = values.mean();
  if (values.size() > 1) {
    const double var = (values - e.value).square().sum() / (n - 1);
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

// E[(w^T r + b)^2] - style quadratic with mean terms.
double population_quadratic(const PopulationSummary& pop, const Vec& w, double b) {
  if (w.size() != pop.dim()) throw Error(Errc::DimensionMismatch, "head and population dimensions differ");
  double q = pop.quadratic_form(w) + b * b;
  if (pop.e_r.size() > 0) q += 2 * b * w.dot(pop.e_r);
  return q;
}

}  // namespace

Estimate population_error(const RidgeHead& head, const PopulationSummary& pop) {
  const Vec w = head.linear();
  const double b = head.bias_weight();
  const double value = population_quadratic(pop, w, b) - 2 * w.dot(pop.e_ry) - 2 * b * pop.e_y + pop.e_y2;
  return {std::max(0.0, value), 0.0};
}

Estimate population_error(const RidgeHead& head, const Split& test) {
  if (test.size() == 0) throw Error(Errc::MissingTestSplit, "test split is empty");
  const Vec residual = predict(head, test.reps) - test.labels;
  return mean_with_error(residual.array().square());
}

namespace {

void require_same_space(const RidgeHead& a, const RidgeHead& b) {
  if (a.weights.size() != b.weights.size() || a.bias != b.bias)
    throw Error(Errc::SpaceMismatch, "heads are defined over different representation spaces");
}

}  // namespace

Estimate pred_gap(const RidgeHead& w2s, const RidgeHead& ceiling, const PopulationSummary& pop) {
  require_same_space(w2s, ceiling);
  const Vec dw = w2s.linear() - ceiling.linear();
  const double db = w2s.bias_weight() - ceiling.bias_weight();
  return {std::max(0.0, population_quadratic(pop, dw, db)), 0.0};
}

Estimate pred_gap(const RidgeHead& w2s, const RidgeHead& ceiling, const Split& test) {
  require_same_space(w2s, ceiling);
  if (test.size() == 0) throw Error(Errc::MissingTestSplit, "test split is empty");
  const Vec diff = predict(w2s, test.reps) - predict(ceiling, test.reps);
  return mean_with_error(diff.array().square());
}

Pipeline fit_pipeline(const RepDataset& weak, const RepDataset& strong, double beta_w, double beta_s, bool bias) {
  if (weak.tilde.size() != strong.tilde.size() || weak.hat.size() != strong.hat.size() ||
      weak.tilde.labels != strong.tilde.labels || weak.hat.labels != strong.hat.labels)
    throw Error(Errc::LabelMismatch, "weak and strong datasets do not share their samples");
  FitOptions opts;
  opts.bias = bias;
  Pipeline out;
  opts.role = HeadRole::weak;
  out.weak = fit_head(weak.tilde.reps, weak.tilde.labels, beta_w, opts);
  out.weak_hat_predictions = predict(out.weak, weak.hat.reps);

  opts.role = HeadRole::w2s;
  const RidgeSolver strong_solver(strong.hat.reps, beta_s, opts);
  out.w2s = strong_solver.fit(out.weak_hat_predictions, HeadRole::w2s);
  out.ceiling = strong_solver.fit(strong.hat.labels, HeadRole::ceiling);
  return out;
}

EvalReport evaluate(const RidgeHead& head, const Mat& train_reps, const Vec& train_targets, const RepDataset& ds) {
  EvalReport report;
  report.predictions = predict(head, train_reps);
  report.err_train = empirical_mse(report.predictions, train_targets);
  if (ds.test) report.err_test = population_error(head, *ds.test).value;
  if (ds.population) report.err_population = population_error(head, *ds.population);
  return report;
}

}  // namespace w2s
