#include "w2s/harness.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <cmath>

namespace w2s {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string config_id(const PairConfig& cfg) {
  if (const auto* toy = std::get_if<ToyPairConfig>(&cfg))
    return "toy:eta_w=" + fmt(toy->eta_w) + ";eta_s=" + fmt(toy->eta_s) + ";d=" + std::to_string(toy->d) +
           ";sigma2=" + fmt(toy->sigma2);
  const auto& sp = std::get<SpikedPairConfig>(cfg);
  return "spiked:k=" + std::to_string(sp.strong.k) + ";d=" + std::to_string(sp.strong.d) +
         ";sigma2_w=" + fmt(sp.weak.sigma2) + ";sigma2_s=" + fmt(sp.strong.sigma2);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Pipeline plus theory-side projections for one generated pair.
struct AnalyticTrial {
  SweepRow row;
  Pipeline pipe;
  ProjectionOperator pw;
  ProjectionOperator ps;
};

AnalyticTrial analytic_trial(const GeneratedPair& g, const Betas& betas, std::string id, std::uint64_t seed) {
  AnalyticTrial t;
  t.pipe = fit_pipeline(g.weak, g.strong, betas.beta_w, betas.beta_s);
  const auto& pop_w = *g.weak.population;
  const auto& pop_s = *g.strong.population;
  auto& row = t.row;
  row.config_id = std::move(id);
  row.seed = seed;
  row.err_w = population_error(t.pipe.weak, pop_w).value;
  row.err_w2s = population_error(t.pipe.w2s, pop_s).value;
  row.err_sc = population_error(t.pipe.ceiling, pop_s).value;
  row.predgap = pred_gap(t.pipe.w2s, t.pipe.ceiling, pop_s).value;
  row.train_mse_w2s = empirical_mse(predict(t.pipe.w2s, g.strong.hat.reps), t.pipe.weak_hat_predictions);

  const DecompParams dw = gamma_from_config(g.weak);
  const DecompParams ds = gamma_from_config(g.strong);
  t.pw = projection_from_subspace(g.weak.hat.reps, select_analytic(pop_w), betas.beta_w + dw.gamma_tilde, Side::weak);
  t.ps = projection_from_subspace(g.strong.hat.reps, select_analytic(pop_s), betas.beta_s + ds.gamma_hat, Side::strong);
  const MetricReport m = w2s_metrics(t.ps, t.pw, g.strong.hat.labels, row.err_sc);
  row.theory_rhs = m.theory_rhs;
  row.norm_ps_ipw = m.norm_ps_ipw;
  row.norm_ps_ipw_ps = m.norm_ps_ipw_ps;
  row.bound1 = m.bound1;
  row.bound2 = *m.bound2;
  return t;
}

void require_population(const GeneratedPair& g) {
  if (!g.weak.population || !g.strong.population)
    throw Error(Errc::MissingPopulation, "harness runs need analytic population summaries");
}

double coefficient(const Vec& v, const Vec& direction) {
  const double denom = direction.squaredNorm();
  if (denom == 0) throw Error(Errc::DegenerateData, "projection direction is zero");
  return v.dot(direction) / denom;
}

PrincipalSubspace sweep_subspace(const RepDataset& ds, const EmpiricalProjection& proj, double alpha) {
  if (proj.mode == SubspaceSource::analytic) return select_analytic(*ds.population);
  return principal_subspace_select(ds, proj.mode, alpha, proj.bias);
}

}  // namespace

void SpikedPairConfig::validate() const {
  weak.validate();
  strong.validate();
  if (weak.seed != strong.seed || weak.n_hat != strong.n_hat || weak.n_tilde != strong.n_tilde ||
      weak.n_test != strong.n_test)
    throw Error(Errc::ConfigViolation, "weak and strong spiked configs must share seed and sample sizes");
  if (weak.stream_tag == strong.stream_tag)
    throw Error(Errc::ConfigViolation, "weak and strong spiked configs need distinct stream tags");
}

GeneratedPair generate_pair(const PairConfig& cfg, std::uint64_t seed) {
  GeneratedPair g;
  if (const auto* toy = std::get_if<ToyPairConfig>(&cfg)) {
    ToyPairConfig c = *toy;
    c.seed = seed;
    ToyPair pair = gen_toy_pair(c);
    g.hat_zeta = pair.weak.aux_hat_zeta;
    g.weak = std::move(pair.weak);
    g.strong = std::move(pair.strong);
  } else {
    SpikedPairConfig c = std::get<SpikedPairConfig>(cfg);
    c.weak.seed = seed;
    c.strong.seed = seed;
    c.validate();
    g.weak = gen_spiked(c.weak);
    g.strong = gen_spiked(c.strong);
  }
  require_population(g);
  return g;
}

std::vector<std::uint64_t> SeedPlan::seeds() const {
  if (count < 1) throw Error(Errc::ConfigViolation, "seed count must be positive");
  std::vector<std::uint64_t> out;
  for (Index i = 0; i < count; ++i) out.push_back(master + static_cast<std::uint64_t>(i));
  return out;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {"config_id",   "seed",       "err_w",          "err_w2s",
                                                "err_sc",      "predgap",    "theory_rhs",     "norm_ps_ipw",
                                                "norm_ps_ipw_ps", "bound1",  "bound2",         "train_mse_w2s"};
  return cols;
}

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {"norm_ps_ipw", "norm_ps_ipw_ps", "theory_rhs", "bound1", "bound2",
                                                "predgap", "err_w"};
  return cols;
}

double sweep_value(const SweepRow& r, const std::string& c) {
  if (c == "seed") return static_cast<double>(r.seed);
  if (c == "err_w") return r.err_w;
  if (c == "err_w2s") return r.err_w2s;
  if (c == "err_sc") return r.err_sc;
  if (c == "predgap") return r.predgap;
  if (c == "theory_rhs") return r.theory_rhs;
  if (c == "norm_ps_ipw") return r.norm_ps_ipw;
  if (c == "norm_ps_ipw_ps") return r.norm_ps_ipw_ps;
  if (c == "bound1") return r.bound1;
  if (c == "bound2") return r.bound2;
  if (c == "train_mse_w2s") return r.train_mse_w2s;
  throw Error(Errc::MissingColumn, "no numeric sweep column '" + c + "'");
}

void aggregate(SweepResult& result) {
  result.aggregates.clear();
  result.spearman.clear();
  result.spearman_per_seed.clear();
  if (result.rows.empty()) throw Error(Errc::EmptySweep, "sweep has no rows");

  std::vector<std::string> ids;
  std::vector<std::uint64_t> seeds;
  for (const auto& r : result.rows) {
    if (std::find(ids.begin(), ids.end(), r.config_id) == ids.end()) ids.push_back(r.config_id);
    if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
  }
  for (const auto& id : ids) {
    SweepRow m;
    m.config_id = id;
    std::uint64_t count = 0;
    for (const auto& r : result.rows) {
      if (r.config_id != id) continue;
      ++count;
      m.err_w += r.err_w;
      m.err_w2s += r.err_w2s;
      m.err_sc += r.err_sc;
      m.predgap += r.predgap;
      m.theory_rhs += r.theory_rhs;
      m.norm_ps_ipw += r.norm_ps_ipw;
      m.norm_ps_ipw_ps += r.norm_ps_ipw_ps;
      m.bound1 += r.bound1;
      m.bound2 += r.bound2;
      m.train_mse_w2s += r.train_mse_w2s;
    }
    const auto c = static_cast<double>(count);
    for (double* f : {&m.err_w, &m.err_w2s, &m.err_sc, &m.predgap, &m.theory_rhs, &m.norm_ps_ipw,
                      &m.norm_ps_ipw_ps, &m.bound1, &m.bound2, &m.train_mse_w2s})
      *f /= c;
    m.seed = count;
    result.aggregates.push_back(std::move(m));
  }
  if (ids.size() < 2) return;

  for (const auto& metric : metric_columns()) {
    std::vector<double> per_seed;
    for (std::uint64_t s : seeds) {
      std::vector<const SweepRow*> cell;
      for (const auto& r : result.rows)
        if (r.seed == s) cell.push_back(&r);
      if (cell.size() < 2) continue;
      Vec x(static_cast<Index>(cell.size()));
      Vec y(x.size());
      for (std::size_t i = 0; i < cell.size(); ++i) {
        x(static_cast<Index>(i)) = sweep_value(*cell[i], metric);
        y(static_cast<Index>(i)) = cell[i]->err_w2s;
      }
      per_seed.push_back(spearman(x, y));
    }
    if (per_seed.empty()) continue;
    result.spearman[metric] = mean(per_seed);
    result.spearman_per_seed[metric] = std::move(per_seed);
  }
}

Thm31Report run_thm31(const PairConfig& cfg, const SeedPlan& seeds, const Betas& betas) {
  Thm31Report rep;
  const std::string id = config_id(cfg);
  std::vector<double> excess1, excess2;
  for (std::uint64_t seed : seeds.seeds()) {
    const AnalyticTrial t = analytic_trial(generate_pair(cfg, seed), betas, id, seed);
    rep.abs_gap.push_back(std::abs(t.row.predgap - t.row.theory_rhs));
    excess1.push_back(t.row.predgap - t.row.bound1);
    excess2.push_back(t.row.predgap - t.row.bound2);
    rep.sweep.rows.push_back(t.row);
  }
  aggregate(rep.sweep);
  rep.mean_abs_gap = mean(rep.abs_gap);
  rep.max_bound1_excess = *std::max_element(excess1.begin(), excess1.end());
  rep.max_bound2_excess = *std::max_element(excess2.begin(), excess2.end());
  return rep;
}

BenignReport run_benign(const ToyPairConfig& cfg, const SeedPlan& seeds, const Betas& betas) {
  cfg.validate();
  if (cfg.eta_s != 1.0) throw Error(Errc::ConfigViolation, "benign overfitting run requires eta_s = 1");
  const double cap = 0.01 * cfg.sigma2 / static_cast<double>(cfg.n_hat);
  if (betas.beta_w > cap || betas.beta_s > cap)
    throw Error(Errc::ConfigViolation, "benign overfitting run requires beta <= 0.01 * sigma2 / n_hat");

  BenignReport rep;
  const PairConfig pc = cfg;
  const std::string id = config_id(pc);
  std::vector<double> delta;
  for (std::uint64_t seed : seeds.seeds()) {
    const GeneratedPair g = generate_pair(pc, seed);
    const AnalyticTrial t = analytic_trial(g, betas, id, seed);
    const Vec& y = g.strong.hat.labels;
    const double root_n = std::sqrt(static_cast<double>(y.size()));
    rep.err_w_hat.push_back(empirical_mse(t.pipe.weak_hat_predictions, y));

    const Vec u = y / root_n;
    const Vec z = *g.hat_zeta / root_n;
    const Vec eps = weak_error_vector(t.pw, y);
    const Vec realized = (y - t.pipe.weak_hat_predictions) / root_n;
    rep.coef_y.push_back(coefficient(eps, u));
    rep.coef_zeta.push_back(coefficient(eps, z));
    rep.realized_coef_y.push_back(coefficient(realized, u));
    rep.realized_coef_zeta.push_back(coefficient(realized, z));
    delta.push_back(t.row.err_w - t.row.theory_rhs);
    rep.sweep.rows.push_back(t.row);
  }
  aggregate(rep.sweep);
  const auto& agg = rep.sweep.aggregates.front();
  rep.mean_err_w = agg.err_w;
  rep.mean_err_w2s = agg.err_w2s;
  rep.mean_err_sc = agg.err_sc;
  rep.mean_err_w_hat = mean(rep.err_w_hat);
  for (const auto& r : rep.sweep.rows) rep.max_train_mse_w2s = std::max(rep.max_train_mse_w2s, r.train_mse_w2s);
  rep.mean_delta = mean(delta);
  rep.mean_coef_y = mean(rep.coef_y);
  rep.mean_coef_zeta = mean(rep.coef_zeta);
  rep.mean_realized_coef_y = mean(rep.realized_coef_y);
  rep.mean_realized_coef_zeta = mean(rep.realized_coef_zeta);
  return rep;
}

PythagorasReport run_pythagoras(const PairConfig& cfg, const SeedPlan& seeds, const Betas& betas) {
  PythagorasReport rep;
  const std::string id = config_id(cfg);
  for (std::uint64_t seed : seeds.seeds()) {
    const GeneratedPair g = generate_pair(cfg, seed);
    const DecompParams ps = gamma_from_config(g.strong);
    if (!(ps.rho > 0)) throw Error(Errc::DegenerateData, "strong principal covariance has no nonzero eigenvalue");
    const double ratio = (betas.beta_s + ps.gamma_hat) / ps.rho;
    rep.precondition_ratio = std::max(rep.precondition_ratio, ratio);
    if (ratio > kMaxPreconditionRatio)
      throw Error(Errc::PreconditionRatioViolated,
                  "(beta_s + gamma_s) / rho_s = " + fmt(ratio) + " exceeds " + fmt(kMaxPreconditionRatio));
    const AnalyticTrial t = analytic_trial(g, betas, id, seed);
    const auto& r = t.row;
    rep.residual.push_back(std::abs(r.err_w2s - (r.predgap + r.err_sc)));
    rep.triangle_slack.push_back(std::sqrt(r.predgap) + std::sqrt(r.err_sc) - std::sqrt(r.err_w2s));
    rep.sweep.rows.push_back(r);
  }
  aggregate(rep.sweep);
  rep.mean_residual = mean(rep.residual);
  rep.min_triangle_slack = *std::min_element(rep.triangle_slack.begin(), rep.triangle_slack.end());
  return rep;
}

MetricSweepReport run_metric_sweep(const ToyPairConfig& strong_cfg, const std::vector<double>& weak_grid,
                                   const SeedPlan& seeds, const Betas& betas, const EmpiricalProjection& proj) {
  if (weak_grid.size() < 5) throw Error(Errc::ConfigViolation, "metric sweep needs at least 5 weak configurations");
  if (std::adjacent_find(weak_grid.begin(), weak_grid.end(), std::not_equal_to<>()) == weak_grid.end())
    throw Error(Errc::ConstantInput, "weak grid has a single distinct value, so rank correlations are undefined");
  strong_cfg.validate();
  MetricSweepReport rep;
  rep.weak_grid = weak_grid;
  FitOptions opts;
  opts.bias = proj.bias;
  for (std::uint64_t seed : seeds.seeds()) {
    ToyPairConfig c = strong_cfg;
    c.eta_w = weak_grid.front();
    c.seed = seed;
    ToyPair pair = gen_toy_pair(c);
    const RepDataset& strong = pair.strong;
    const Vec& y = strong.hat.labels;

    opts.role = HeadRole::ceiling;
    const RidgeSolver solver(strong.hat.reps, betas.beta_s, opts);
    const RidgeHead ceiling = solver.fit(y, HeadRole::ceiling);
    const double err_sc = population_error(ceiling, *strong.population).value;
    const ProjectionOperator ps = projection_from_subspace(
        strong.hat.reps, sweep_subspace(strong, proj, proj.alpha_s),
        proj.beta_eff_s, Side::strong);

    for (double eta : weak_grid) {
      set_weak_eta(pair, eta);
      const RepDataset& weak = pair.weak;
      opts.role = HeadRole::weak;
      const RidgeHead wh = fit_head(weak.tilde.reps, weak.tilde.labels, betas.beta_w, opts);
      const Vec pseudo = predict(wh, weak.hat.reps);
      const RidgeHead w2s = solver.fit(pseudo, HeadRole::w2s);
      const ProjectionOperator pw = projection_from_subspace(
          weak.hat.reps, sweep_subspace(weak, proj, proj.alpha_w), proj.beta_eff_w,
          Side::weak);
      const MetricReport m = w2s_metrics(ps, pw, y, err_sc);

      SweepRow row;
      row.config_id = "eta_w=" + fmt(eta);
      row.seed = seed;
      row.err_w = population_error(wh, *weak.population).value;
      row.err_w2s = population_error(w2s, *strong.population).value;
      row.err_sc = err_sc;
      row.predgap = pred_gap(w2s, ceiling, *strong.population).value;
      row.theory_rhs = m.theory_rhs;
      row.norm_ps_ipw = m.norm_ps_ipw;
      row.norm_ps_ipw_ps = m.norm_ps_ipw_ps;
      row.bound1 = m.bound1;
      row.bound2 = *m.bound2;
      row.train_mse_w2s = empirical_mse(predict(w2s, strong.hat.reps), pseudo);
      rep.sweep.rows.push_back(std::move(row));
    }
  }
  aggregate(rep.sweep);
  rep.mean_rho_norm_ps_ipw = rep.sweep.spearman.at("norm_ps_ipw");
  rep.mean_rho_norm_ps_ipw_ps = rep.sweep.spearman.at("norm_ps_ipw_ps");
  return rep;
}

}  // namespace w2s
