#pragma once

// Synthetic representation generators with shared labels, analytic population
// summaries, and dataset files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "w2s/numlin.hpp"

namespace w2s {

/// One labeled split: representations stored column-per-sample (d x n).
struct Split {
  Mat reps;
  Vec labels;

  Index size() const { return labels.size(); }
  Index dim() const { return reps.rows(); }
};

/// A block of the population covariance: an orthonormal basis sharing one eigenvalue.
struct CovBlock {
  Mat basis;
  double eigenvalue = 0.0;
};

/// Structured description of Sigma = E[r r^T] together with the label moments.
///
/// The blocks and the isotropic tail together cover R^d: the tail is the
/// orthogonal complement of all block bases, with `tail_dim` dimensions and
/// per-coordinate variance `tail_variance`. Large-d covariances are never
/// formed densely.
struct PopulationSummary {
  std::vector<CovBlock> blocks;
  Index tail_dim = 0;
  double tail_variance = 0.0;
  Vec e_ry;               // E[r y]
  double e_y2 = 0.0;      // E[y^2]
  Vec e_r;                // E[r]; empty means zero
  double e_y = 0.0;       // E[y]
  Mat principal_basis;    // orthonormal basis of the analytic principal subspace
  bool estimated = false; // true when moments come from a Monte-Carlo pass

  Index dim() const { return e_ry.size(); }

  /// Sigma * v for a d x m block of vectors.
  Mat apply(const Mat& v) const;
  double quadratic_form(const Vec& w) const;
  /// ||Sigma||_op.
  double norm() const;
  /// Dense Sigma; only sensible for small d.
  Mat dense() const;
  void validate() const;
};

struct RepDataset {
  Index dim = 0;
  Split tilde;  // weak-finetune split
  Split hat;    // W2S-finetune split
  std::optional<Split> test;
  std::optional<PopulationSummary> population;
  std::optional<Vec> aux_hat_zeta;

  void validate() const;
};

enum class TailFamily { gaussian, rademacher, uniform };

TailFamily tail_family_from_string(const std::string& name);
std::string to_string(TailFamily family);

struct SpikedConfig {
  Index k = 1;
  Index d = 100;
  double sigma2 = 1.0;
  Index n_hat = 100;
  Index n_tilde = 100;
  Index n_test = 0;
  TailFamily tail_family = TailFamily::gaussian;
  std::vector<double> label_coupling;  // eta_i per principal coordinate, length k
  std::uint64_t seed = 0;
  // Noise streams are keyed by this tag; labels are not, so two configs with
  // the same seed and sizes but different tags share their label draws.
  std::string stream_tag = "spiked";

  void validate() const;
};

struct ToyPairConfig {
  double eta_w = 0.6;
  double eta_s = 1.0;
  Index d = 40000;
  double sigma2 = 8.0;
  Index n_hat = 128;
  Index n_tilde = 128;
  Index n_test = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BoundedConfig {
  double B = 1.0;
  Index q = 3;
  Index d = 50;
  double C = 1.0;
  Index n_hat = 100;
  Index n_tilde = 100;
  Index n_test = 0;
  std::uint64_t seed = 0;
  double label_share = 0.5;          // fraction of the norm budget given to the label coordinate
  Index mc_samples = 1'000'000;      // population moment estimation

  void validate() const;
};

struct LiftConfig {
  Index m = 0;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  RepDataset base;

  void validate() const;
};

RepDataset gen_spiked(const SpikedConfig& cfg);

/// Weak and strong views of the same samples, plus the latent zeta draws.
struct ToyPair {
  RepDataset weak;
  RepDataset strong;
  Vec tilde_zeta;
  Vec test_zeta;
};

ToyPair gen_toy_pair(const ToyPairConfig& cfg);

/// Rewrites the weak model's label-carrying coordinate for a new eta_w.
/// Equivalent to regenerating the pair with the same seed and the new eta_w.
void set_weak_eta(ToyPair& pair, double eta_w);

RepDataset gen_bounded(const BoundedConfig& cfg);

/// Orthonormal embedding R^d x R^m -> R^{d+m}: [M  M_perp] from a seeded QR.
class LiftEmbedding {
 public:
  LiftEmbedding(Index base_dim, Index m, std::uint64_t seed);

  Index base_dim() const { return base_dim_; }
  Index extra_dim() const { return m_; }

  /// M h + M_perp xi, column-wise. `xi` may be empty when m = 0.
  Mat apply(const Mat& h, const Mat& xi) const;
  /// M v for vectors in the base space.
  Mat map_base(const Mat& v) const;
  Mat M() const;
  Mat M_perp() const;

 private:
  Index base_dim_;
  Index m_;
  Eigen::HouseholderQR<Mat> qr_;
};

RepDataset lift(const LiftConfig& cfg);

/// Moments estimated from a sample (used when no analytic summary exists).
PopulationSummary estimate_population(const Split& sample, const Mat& principal_basis);

enum class DatasetFormat { binary, csv };

DatasetFormat dataset_format_from_string(const std::string& name);

void write_dataset(const RepDataset& ds, const std::filesystem::path& path, DatasetFormat format);
RepDataset read_dataset(const std::filesystem::path& path, DatasetFormat format);

/// CSV: one sample per row, feature columns then the label; header optional.
void write_split_csv(const Split& split, const std::filesystem::path& path);
Split read_split_csv(const std::filesystem::path& path);

}  // namespace w2s
