#pragma once

// Closed-form ridge heads for the weak, W2S and strong-ceiling roles.

#include <optional>

#include "w2s/datagen.hpp"

namespace w2s {

enum class HeadRole { weak, w2s, ceiling };

const char* to_string(HeadRole role) noexcept;

enum class SolvePath { automatic, primal, dual };

struct FitOptions {
  bool bias = false;   // append a constant-1 coordinate (it is regularized like the rest)
  bool pinv = false;   // allow beta = 0; eigenvalues below 1e-10 are treated as zero
  SolvePath path = SolvePath::automatic;  // automatic: dual when d > n
  HeadRole role = HeadRole::weak;
};

/// A fitted linear head. With `bias` set the last weight multiplies the constant 1.
struct RidgeHead {
  Vec weights;
  double beta = 0.0;
  bool bias = false;
  HeadRole role = HeadRole::weak;

  Index input_dim() const { return weights.size() - (bias ? 1 : 0); }
  auto linear() const { return weights.head(input_dim()); }
  double bias_weight() const { return bias ? weights(weights.size() - 1) : 0.0; }
};

Mat with_bias_row(const Mat& reps);

/// Ridge solver with the system factorized once, reusable across target vectors.
///
/// Minimizes (1/n) sum (w^T r_i - t_i)^2 + beta ||w||^2. The dual path solves
/// the n x n system (R^T R / n + beta I) a = t / n and returns w = R a; the
/// primal path solves (R R^T / n + beta I) w = R t / n. Both give the same w.
class RidgeSolver {
 public:
  RidgeSolver(const Mat& reps, double beta, const FitOptions& opts = {});
  RidgeSolver(const RidgeSolver&) = delete;
  RidgeSolver& operator=(const RidgeSolver&) = delete;

  RidgeHead fit(const Vec& targets) const;
  RidgeHead fit(const Vec& targets, HeadRole role) const;

  bool dual() const { return dual_; }
  Index samples() const { return reps_->cols(); }

 private:
  Vec solve_system(const Vec& rhs) const;

  Mat owned_;          // reps with the bias row, when requested
  const Mat* reps_;
  double beta_;
  FitOptions opts_;
  bool dual_;
  Eigen::LDLT<Mat> ldlt_;
  SymEig<double> eig_;  // pinv mode only
};

RidgeHead fit_head(const Mat& reps, const Vec& targets, double beta, const FitOptions& opts = {});

Vec predict(const RidgeHead& head, const Mat& reps);

double empirical_mse(const Vec& preds, const Vec& targets);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// E[(f(r) - y)^2] in closed form from the population moments.
Estimate population_error(const RidgeHead& head, const PopulationSummary& pop);
/// Mean squared residual on a held-out split, with its standard error.
Estimate population_error(const RidgeHead& head, const Split& test);

/// E[(f_w2s(r) - f_sc(r))^2], analytic or Monte-Carlo.
Estimate pred_gap(const RidgeHead& w2s, const RidgeHead& ceiling, const PopulationSummary& pop);
Estimate pred_gap(const RidgeHead& w2s, const RidgeHead& ceiling, const Split& test);

struct Pipeline {
  RidgeHead weak;
  RidgeHead w2s;
  RidgeHead ceiling;
  Vec weak_hat_predictions;  // pseudo-labels the W2S head is trained on
};

/// weak on (R~_w, y~, beta_w); w2s on (R^_s, f_w(R^_w), beta_s); ceiling on (R^_s, y^, beta_s).
Pipeline fit_pipeline(const RepDataset& weak, const RepDataset& strong, double beta_w, double beta_s,
                      bool bias = false);

struct EvalReport {
  double err_train = 0.0;
  std::optional<double> err_test;
  std::optional<Estimate> err_population;
  Vec predictions;  // on the training reps
};

EvalReport evaluate(const RidgeHead& head, const Mat& train_reps, const Vec& train_targets, const RepDataset& ds);

}  // namespace w2s
