#include "w2s/datagen.hpp"

#include <cmath>
#include <numeric>

#include "w2s/rng.hpp"

namespace w2s {
namespace {

constexpr std::uint64_t kTildeStream = 0;
constexpr std::uint64_t kHatStream = 1;
constexpr std::uint64_t kTestStream = 2;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ConfigViolation, what);
}

void validate_split(const Split& s, Index dim, const char* name) {
  if (s.reps.rows() != dim || s.reps.cols() != s.labels.size())
    throw Error(Errc::DimensionMismatch, std::string(name) + " split shape does not match labels/dim");
  if (!all_finite(s.reps) || !all_finite(s.labels))
    throw Error(Errc::NonFiniteEntry, std::string(name) + " split has non-finite entries");
}

Mat unit_columns(Index d, Index first, Index count) {
  Mat basis = Mat::Zero(d, count);
  for (Index j = 0; j < count; ++j) basis(first + j, j) = 1.0;
  return basis;
}

// Stack all block bases side by side.
Mat stacked_blocks(const PopulationSummary& pop) {
  Index cols = 0;
  for (const auto& b : pop.blocks) cols += b.basis.cols();
  Mat out(pop.dim(), cols);
  Index at = 0;
  for (const auto& b : pop.blocks) {
    out.middleCols(at, b.basis.cols()) = b.basis;
    at += b.basis.cols();
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PopulationSummary

Mat PopulationSummary::apply(const Mat& v) const {
  const double tail = tail_dim > 0 ? tail_variance : 0.0;
  Mat out = tail * v;
  for (const auto& b : blocks) out.noalias() += (b.eigenvalue - tail) * (b.basis * (b.basis.transpose() * v));
  return out;
}

double PopulationSummary::quadratic_form(const Vec& w) const {
  const double tail = tail_dim > 0 ? tail_variance : 0.0;
  double q = tail * w.squaredNorm();
  for (const auto& b : blocks) q += (b.eigenvalue - tail) * (b.basis.transpose() * w).squaredNorm();
  return q;
}

double PopulationSummary::norm() const {
  double n = tail_dim > 0 ? std::abs(tail_variance) : 0.0;
  for (const auto& b : blocks)
    if (b.basis.cols() > 0) n = std::max(n, std::abs(b.eigenvalue));
  return n;
}

Mat PopulationSummary::dense() const { return apply(Mat::Identity(dim(), dim())); }

void PopulationSummary::validate() const {
  const Index d = dim();
  Index covered = tail_dim;
  for (const auto& b : blocks) {
    if (b.basis.rows() != d) throw Error(Errc::DimensionMismatch, "covariance block has wrong dimension");
    if (b.eigenvalue < -1e-12) throw Error(Errc::ConfigViolation, "negative covariance eigenvalue");
    covered += b.basis.cols();
  }
  if (covered != d) throw Error(Errc::DimensionMismatch, "covariance blocks and tail do not cover the space");
  if (tail_variance < 0) throw Error(Errc::ConfigViolation, "negative tail variance");
  const Mat s = stacked_blocks(*this);
  if (s.cols() > 0 && (s.transpose() * s - Mat::Identity(s.cols(), s.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw Error(Errc::ConfigViolation, "covariance blocks are not mutually orthonormal");
  if (principal_basis.rows() != d) throw Error(Errc::DimensionMismatch, "principal basis has wrong dimension");
  if (e_r.size() != 0 && e_r.size() != d) throw Error(Errc::DimensionMismatch, "E[r] has wrong dimension");
  if (e_y2 < 0) throw Error(Errc::ConfigViolation, "E[y^2] is negative");
}

void RepDataset::validate() const {
  if (dim <= 0) throw Error(Errc::DimensionMismatch, "dataset dimension must be positive");
  validate_split(tilde, dim, "tilde");
  validate_split(hat, dim, "hat");
  if (test) validate_split(*test, dim, "test");
  if (aux_hat_zeta && aux_hat_zeta->size() != hat.size())
    throw Error(Errc::DimensionMismatch, "aux zeta length does not match hat split");
  if (population) {
    if (population->dim() != dim) throw Error(Errc::DimensionMismatch, "population dimension mismatch");
    population->validate();
  }
}

TailFamily tail_family_from_string(const std::string& name) {
  if (name == "gaussian") return TailFamily::gaussian;
  if (name == "rademacher" || name == "rademacher-scaled") return TailFamily::rademacher;
  if (name == "uniform" || name == "uniform-scaled") return TailFamily::uniform;
  throw Error(Errc::ConfigViolation, "unknown tail family '" + name + "'");
}

std::string to_string(TailFamily family) {
  switch (family) {
    case TailFamily::gaussian: return "gaussian";
    case TailFamily::rademacher: return "rademacher";
    case TailFamily::uniform: return "uniform";
  }
  return "gaussian";
}

// ---------------------------------------------------------------------------
// Spiked covariance

void SpikedConfig::validate() const {
  require(k >= 0, "k must be nonnegative");
  require(d > k, "d must exceed k");
  require(sigma2 >= 0, "sigma2 must be nonnegative");
  require(n_hat >= 1 && n_tilde >= 1 && n_test >= 0, "split sizes must be positive");
  require(label_coupling.empty() || static_cast<Index>(label_coupling.size()) == k,
          "label_coupling must have length k");
  double total = 0;
  for (double eta : label_coupling) {
    require(eta >= 0 && eta <= 1, "label coupling must lie in [0, 1]");
    total += eta;
  }
  require(total <= 1 + 1e-12, "sum of label couplings exceeds 1");
}

namespace {

Split spiked_split(const SpikedConfig& cfg, std::uint64_t stream, Index n) {
  RandomStream labels(cfg.seed, "spiked/label", stream);
  RandomStream principal(cfg.seed, cfg.stream_tag + "/principal", stream);
  RandomStream tail(cfg.seed, cfg.stream_tag + "/tail", stream);
  const Index tail_dim = cfg.d - cfg.k;
  const double sd = std::sqrt(cfg.sigma2 / static_cast<double>(tail_dim));
  std::vector<double> coupling(cfg.k, 0.0);
  std::copy(cfg.label_coupling.begin(), cfg.label_coupling.end(), coupling.begin());

  Split s{Mat(cfg.d, n), Vec(n)};
  for (Index j = 0; j < n; ++j) {
    const double y = labels.normal();
    s.labels(j) = y;
    auto col = s.reps.col(j);
    for (Index i = 0; i < cfg.k; ++i) {
      const double eta = coupling[i];
      col(i) = std::sqrt(eta) * y + std::sqrt(1 - eta) * principal.normal();
    }
    switch (cfg.tail_family) {
      case TailFamily::gaussian:
        for (Index i = cfg.k; i < cfg.d; ++i) col(i) = sd * tail.normal();
        break;
      case TailFamily::rademacher:
        for (Index i = cfg.k; i < cfg.d; ++i) col(i) = sd * tail.rademacher();
        break;
      case TailFamily::uniform:
        for (Index i = cfg.k; i < cfg.d; ++i) col(i) = sd * std::sqrt(3.0) * (2 * tail.uniform() - 1);
        break;
    }
  }
  return s;
}

}  // namespace

RepDataset gen_spiked(const SpikedConfig& cfg) {
  cfg.validate();
  RepDataset ds;
  ds.dim = cfg.d;
  ds.tilde = spiked_split(cfg, kTildeStream, cfg.n_tilde);
  ds.hat = spiked_split(cfg, kHatStream, cfg.n_hat);
  if (cfg.n_test > 0) ds.test = spiked_split(cfg, kTestStream, cfg.n_test);

  // Principal covariance: I - diag(eta) + sqrt(eta) sqrt(eta)^T on the first k coordinates.
  Vec root = Vec::Zero(cfg.k);
  for (Index i = 0; i < static_cast<Index>(cfg.label_coupling.size()); ++i) root(i) = std::sqrt(cfg.label_coupling[i]);
  PopulationSummary pop;
  if (cfg.k > 0) {
    Mat principal = Mat::Identity(cfg.k, cfg.k);
    principal.diagonal() -= root.cwiseAbs2();
    principal += root * root.transpose();
    const auto eig = sym_eig(principal);
    for (Index i = 0; i < cfg.k; ++i) {
      Mat basis = Mat::Zero(cfg.d, 1);
      basis.topRows(cfg.k) = eig.vectors.col(i);
      pop.blocks.push_back({std::move(basis), eig.values(i)});
    }
  }
  pop.tail_dim = cfg.d - cfg.k;
  pop.tail_variance = cfg.sigma2 / static_cast<double>(cfg.d - cfg.k);
  pop.e_ry = Vec::Zero(cfg.d);
  pop.e_ry.head(cfg.k) = root;
  pop.e_y2 = 1.0;
  pop.principal_basis = unit_columns(cfg.d, 0, cfg.k);
  ds.population = std::move(pop);
  return ds;
}

// ---------------------------------------------------------------------------
// Toy weak/strong pair

void ToyPairConfig::validate() const {
  require(eta_w > 0 && eta_w < 1, "eta_w must lie in (0, 1)");
  require(eta_s > 0 && eta_s <= 1, "eta_s must lie in (0, 1]");
  require(d >= 2, "d must be at least 2");
  require(sigma2 > 0, "sigma2 must be positive");
  require(n_hat >= 1 && n_tilde >= 1 && n_test >= 0, "split sizes must be positive");
}

namespace {

double weak_coordinate(double eta, double y, double zeta) {
  return std::sqrt(eta) * y + std::sqrt(1 - eta) * zeta;
}

struct ToySplit {
  Split weak;
  Split strong;
  Vec zeta;
};

ToySplit toy_split(const ToyPairConfig& cfg, std::uint64_t stream, Index n) {
  RandomStream ys(cfg.seed, "toy/y", stream);
  RandomStream zs(cfg.seed, "toy/zeta", stream);
  RandomStream zs_strong(cfg.seed, "toy/zeta_s", stream);
  RandomStream xw(cfg.seed, "toy/xi_w", stream);
  RandomStream xs(cfg.seed, "toy/xi_s", stream);
  const double sd = std::sqrt(cfg.sigma2 / static_cast<double>(cfg.d - 1));

  ToySplit out{{Mat(cfg.d, n), Vec(n)}, {Mat(cfg.d, n), Vec(n)}, Vec(n)};
  for (Index j = 0; j < n; ++j) {
    const double y = ys.normal();
    const double zeta = zs.normal();
    const double zeta_strong = zs_strong.normal();
    out.weak.labels(j) = y;
    out.strong.labels(j) = y;
    out.zeta(j) = zeta;
    out.weak.reps(0, j) = weak_coordinate(cfg.eta_w, y, zeta);
    out.strong.reps(0, j) = cfg.eta_s == 1.0 ? y : std::sqrt(cfg.eta_s) * y + std::sqrt(1 - cfg.eta_s) * zeta_strong;
  }
  // Tails are filled column by column from their own streams.
  for (Index j = 0; j < n; ++j) {
    auto col = out.weak.reps.col(j);
    for (Index i = 1; i < cfg.d; ++i) col(i) = sd * xw.normal();
  }
  for (Index j = 0; j < n; ++j) {
    auto col = out.strong.reps.col(j);
    for (Index i = 1; i < cfg.d; ++i) col(i) = sd * xs.normal();
  }
  return out;
}

PopulationSummary toy_population(Index d, double sigma2, double eta) {
  PopulationSummary pop;
  pop.blocks.push_back({unit_columns(d, 0, 1), 1.0});
  pop.tail_dim = d - 1;
  pop.tail_variance = sigma2 / static_cast<double>(d - 1);
  pop.e_ry = Vec::Zero(d);
  pop.e_ry(0) = std::sqrt(eta);
  pop.e_y2 = 1.0;
  pop.principal_basis = unit_columns(d, 0, 1);
  return pop;
}

}  // namespace

ToyPair gen_toy_pair(const ToyPairConfig& cfg) {
  cfg.validate();
  ToyPair pair;
  auto tilde = toy_split(cfg, kTildeStream, cfg.n_tilde);
  auto hat = toy_split(cfg, kHatStream, cfg.n_hat);

  pair.weak.dim = pair.strong.dim = cfg.d;
  pair.weak.tilde = std::move(tilde.weak);
  pair.strong.tilde = std::move(tilde.strong);
  pair.tilde_zeta = std::move(tilde.zeta);
  pair.weak.hat = std::move(hat.weak);
  pair.strong.hat = std::move(hat.strong);
  pair.weak.aux_hat_zeta = std::move(hat.zeta);
  if (cfg.n_test > 0) {
    auto test = toy_split(cfg, kTestStream, cfg.n_test);
    pair.weak.test = std::move(test.weak);
    pair.strong.test = std::move(test.strong);
    pair.test_zeta = std::move(test.zeta);
  }
  pair.weak.population = toy_population(cfg.d, cfg.sigma2, cfg.eta_w);
  pair.strong.population = toy_population(cfg.d, cfg.sigma2, cfg.eta_s);
  return pair;
}

void set_weak_eta(ToyPair& pair, double eta_w) {
  if (!(eta_w > 0 && eta_w < 1)) throw Error(Errc::ConfigViolation, "eta_w must lie in (0, 1)");
  auto rewrite = [eta_w](Split& s, const Vec& zeta) {
    for (Index j = 0; j < s.size(); ++j) s.reps(0, j) = weak_coordinate(eta_w, s.labels(j), zeta(j));
  };
  rewrite(pair.weak.tilde, pair.tilde_zeta);
  rewrite(pair.weak.hat, *pair.weak.aux_hat_zeta);
  if (pair.weak.test) rewrite(*pair.weak.test, pair.test_zeta);
  pair.weak.population->e_ry(0) = std::sqrt(eta_w);
}

// ---------------------------------------------------------------------------
// Bounded representations with low intrinsic dimension
//
// Latent [u, z] in R^{q+1}: u = sqrt(B * share / C) * y with y a standard
// normal clipped to [-sqrt(C), sqrt(C)], z uniform on the q-ball of radius
// sqrt(B * (1 - share)). The latent is embedded by a seeded orthonormal map.

void BoundedConfig::validate() const {
  require(B > 0, "B must be positive");
  require(q >= 1, "q must be positive");
  require(d >= q + 1, "d must be at least q + 1 (label coordinate plus q latent directions)");
  require(C > 0, "C must be positive");
  require(n_hat >= 1 && n_tilde >= 1 && n_test >= 0, "split sizes must be positive");
  require(label_share > 0 && label_share < 1, "label_share must lie in (0, 1)");
  require(mc_samples >= 1, "mc_samples must be positive");
}

namespace {

// Slightly inside the boundary so that rounding in the embedding cannot push
// a sample past ||h||^2 = B.
constexpr double kBoundaryShrink = 1.0 - 1e-12;

struct BoundedSampler {
  const BoundedConfig& cfg;
  double clip;
  double label_scale;
  double radius;

  explicit BoundedSampler(const BoundedConfig& c)
      : cfg(c),
        clip(std::sqrt(c.C)),
        label_scale(std::sqrt(c.B * c.label_share / c.C) * kBoundaryShrink),
        radius(std::sqrt(c.B * (1 - c.label_share)) * kBoundaryShrink) {
    while (clip * clip > c.C) clip = std::nextafter(clip, 0.0);
  }

  // Fills latent column and returns the label.
  template <typename Col>
  double draw(RandomStream& labels, RandomStream& latent, Col&& out) const {
    const double y = std::clamp(labels.normal(), -clip, clip);
    out(0) = label_scale * y;
    double norm2 = 0;
    for (Index i = 1; i <= cfg.q; ++i) {
      out(i) = latent.normal();
      norm2 += out(i) * out(i);
    }
    const double r = radius * std::pow(latent.uniform(), 1.0 / static_cast<double>(cfg.q));
    const double scale = norm2 > 0 ? r / std::sqrt(norm2) : 0.0;
    for (Index i = 1; i <= cfg.q; ++i) out(i) *= scale;
    return y;
  }
};

Split bounded_split(const BoundedSampler& sampler, const Mat& embed, std::uint64_t stream, Index n) {
  RandomStream labels(sampler.cfg.seed, "bounded/label", stream);
  RandomStream latent(sampler.cfg.seed, "bounded/latent", stream);
  Mat lat(sampler.cfg.q + 1, n);
  Vec y(n);
  for (Index j = 0; j < n; ++j) y(j) = sampler.draw(labels, latent, lat.col(j));
  return {embed * lat, y};
}

}  // namespace

RepDataset gen_bounded(const BoundedConfig& cfg) {
  cfg.validate();
  const Index latent_dim = cfg.q + 1;
  Mat gauss(cfg.d, latent_dim);
  RandomStream es(cfg.seed, "bounded/embed");
  for (Index j = 0; j < latent_dim; ++j)
    for (Index i = 0; i < cfg.d; ++i) gauss(i, j) = es.normal();
  const Mat embed = Eigen::HouseholderQR<Mat>(gauss).householderQ() * Mat::Identity(cfg.d, latent_dim);

  const BoundedSampler sampler(cfg);
  RepDataset ds;
  ds.dim = cfg.d;
  ds.tilde = bounded_split(sampler, embed, kTildeStream, cfg.n_tilde);
  ds.hat = bounded_split(sampler, embed, kHatStream, cfg.n_hat);
  if (cfg.n_test > 0) ds.test = bounded_split(sampler, embed, kTestStream, cfg.n_test);

  // Monte-Carlo moments of the latent, mapped through the embedding.
  RandomStream mc_labels(cfg.seed, "bounded/mc_label");
  RandomStream mc_latent(cfg.seed, "bounded/mc_latent");
  Mat second = Mat::Zero(latent_dim, latent_dim);
  Vec cross = Vec::Zero(latent_dim);
  double y2 = 0;
  constexpr Index kBatch = 8192;
  Mat lat(latent_dim, kBatch);
  Vec yb(kBatch);
  for (Index done = 0; done < cfg.mc_samples; done += kBatch) {
    const Index b = std::min(kBatch, cfg.mc_samples - done);
    for (Index j = 0; j < b; ++j) yb(j) = sampler.draw(mc_labels, mc_latent, lat.col(j));
    second.noalias() += lat.leftCols(b) * lat.leftCols(b).transpose();
    cross.noalias() += lat.leftCols(b) * yb.head(b);
    y2 += yb.head(b).squaredNorm();
  }
  const double inv = 1.0 / static_cast<double>(cfg.mc_samples);
  second *= inv;
  cross *= inv;

  PopulationSummary pop;
  const auto eig = sym_eig(second);
  for (Index i = 0; i < latent_dim; ++i) pop.blocks.push_back({embed * eig.vectors.col(i), std::max(0.0, eig.values(i))});
  pop.tail_dim = cfg.d - latent_dim;
  pop.tail_variance = 0.0;
  pop.e_ry = embed * cross;
  pop.e_y2 = y2 * inv;
  pop.principal_basis = embed * eig.vectors;
  pop.estimated = true;
  ds.population = std::move(pop);
  return ds;
}

// ---------------------------------------------------------------------------
// Lift

void LiftConfig::validate() const {
  require(m >= 0, "m must be nonnegative");
  require(sigma2 >= 0, "sigma2 must be nonnegative");
  require(!(m == 0 && sigma2 > 0), "m = 0 with sigma2 > 0 has nowhere to put the added noise");
  base.validate();
}

LiftEmbedding::LiftEmbedding(Index base_dim, Index m, std::uint64_t seed) : base_dim_(base_dim), m_(m) {
  Mat gauss(base_dim + m, base_dim);
  RandomStream s(seed, "lift/basis");
  for (Index j = 0; j < base_dim; ++j)
    for (Index i = 0; i < base_dim + m; ++i) gauss(i, j) = s.normal();
  qr_.compute(gauss);
}

Mat LiftEmbedding::apply(const Mat& h, const Mat& xi) const {
  if (h.rows() != base_dim_) throw Error(Errc::DimensionMismatch, "lift input has wrong dimension");
  Mat stacked = Mat::Zero(base_dim_ + m_, h.cols());
  stacked.topRows(base_dim_) = h;
  if (m_ > 0) {
    if (xi.rows() != m_ || xi.cols() != h.cols()) throw Error(Errc::DimensionMismatch, "lift noise has wrong shape");
    stacked.bottomRows(m_) = xi;
  }
  return qr_.householderQ() * stacked;
}

Mat LiftEmbedding::map_base(const Mat& v) const {
  Mat stacked = Mat::Zero(base_dim_ + m_, v.cols());
  stacked.topRows(base_dim_) = v;
  return qr_.householderQ() * stacked;
}

Mat LiftEmbedding::M() const { return map_base(Mat::Identity(base_dim_, base_dim_)); }

Mat LiftEmbedding::M_perp() const {
  Mat stacked = Mat::Zero(base_dim_ + m_, m_);
  stacked.bottomRows(m_) = Mat::Identity(m_, m_);
  return qr_.householderQ() * stacked;
}

namespace {

// The base tail only has an implicit basis; it must become an explicit block
// because the lifted tail is the M_perp span.
constexpr Index kMaxExplicitTail = 5000;

Split lift_split(const LiftEmbedding& embed, const LiftConfig& cfg, const Split& base, std::uint64_t stream) {
  Mat xi(cfg.m, base.size());
  if (cfg.m > 0) {
    RandomStream s(cfg.seed, "lift/xi", stream);
    const double sd = std::sqrt(cfg.sigma2 / static_cast<double>(cfg.m));
    for (Index j = 0; j < base.size(); ++j)
      for (Index i = 0; i < cfg.m; ++i) xi(i, j) = sd * s.normal();
  }
  return {embed.apply(base.reps, xi), base.labels};
}

}  // namespace

RepDataset lift(const LiftConfig& cfg) {
  cfg.validate();
  const Index d = cfg.base.dim;
  const LiftEmbedding embed(d, cfg.m, cfg.seed);
  RepDataset ds;
  ds.dim = d + cfg.m;
  ds.tilde = lift_split(embed, cfg, cfg.base.tilde, kTildeStream);
  ds.hat = lift_split(embed, cfg, cfg.base.hat, kHatStream);
  if (cfg.base.test) ds.test = lift_split(embed, cfg, *cfg.base.test, kTestStream);
  ds.aux_hat_zeta = cfg.base.aux_hat_zeta;

  if (cfg.base.population) {
    const auto& base = *cfg.base.population;
    PopulationSummary pop;
    for (const auto& b : base.blocks) pop.blocks.push_back({embed.map_base(b.basis), b.eigenvalue});
    if (base.tail_dim > 0) {
      if (base.tail_dim > kMaxExplicitTail)
        throw Error(Errc::ConfigViolation, "lift supports base tails of at most 5000 dimensions");
      const Mat spanned = stacked_blocks(base);
      Mat complement;
      if (spanned.cols() == 0) {
        complement = Mat::Identity(d, d);
      } else {
        Eigen::HouseholderQR<Mat> qr(spanned);
        Mat selector = Mat::Zero(d, base.tail_dim);
        selector.bottomRows(base.tail_dim) = Mat::Identity(base.tail_dim, base.tail_dim);
        complement = qr.householderQ() * selector;
      }
      pop.blocks.push_back({embed.map_base(complement), base.tail_variance});
    }
    pop.tail_dim = cfg.m;
    pop.tail_variance = cfg.m > 0 ? cfg.sigma2 / static_cast<double>(cfg.m) : 0.0;
    pop.e_ry = embed.map_base(base.e_ry);
    if (base.e_r.size() > 0) pop.e_r = embed.map_base(base.e_r);
    pop.e_y2 = base.e_y2;
    pop.e_y = base.e_y;
    pop.principal_basis = embed.map_base(base.principal_basis);
    pop.estimated = base.estimated;
    ds.population = std::move(pop);
  }
  return ds;
}

PopulationSummary estimate_population(const Split& sample, const Mat& principal_basis) {
  const Index n = sample.size();
  if (n < 1) throw Error(Errc::DegenerateData, "empty sample");
  const double inv = 1.0 / static_cast<double>(n);
  const Mat second = inv * sample.reps * sample.reps.transpose();
  const auto eig = sym_eig(second);
  PopulationSummary pop;
  for (Index i = 0; i < eig.values.size(); ++i) pop.blocks.push_back({eig.vectors.col(i), std::max(0.0, eig.values(i))});
  pop.tail_dim = 0;
  pop.e_ry = inv * sample.reps * sample.labels;
  pop.e_y2 = inv * sample.labels.squaredNorm();
  pop.e_r = sample.reps.rowwise().mean();
  pop.e_y = sample.labels.mean();
  pop.principal_basis = principal_basis;
  pop.estimated = true;
  return pop;
}

}  // namespace w2s
