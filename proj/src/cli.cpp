#include "w2s/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <new>

#include <CLI11.hpp>

#include "w2s/config.hpp"
#include "w2s/report.hpp"

namespace w2s {
namespace {

struct Context {
  RunConfig rc;
  std::ostream& out;
};

void require_path(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw Error(Errc::ConfigViolation, std::string("io.") + key + " must be set for this command");
}

void require_distinct(const std::vector<std::filesystem::path>& inputs,
                      const std::vector<std::filesystem::path>& outputs) {
  std::vector<std::filesystem::path> seen;
  for (const auto& p : outputs) {
    if (p.empty()) continue;
    const auto norm = p.lexically_normal();
    for (const auto& q : inputs)
      if (!q.empty() && q.lexically_normal() == norm)
        throw Error(Errc::ConfigViolation, "'" + p.string() + "' is used both as input and output");
    for (const auto& q : seen)
      if (q == norm) throw Error(Errc::ConfigViolation, "'" + p.string() + "' is used for two outputs");
    seen.push_back(norm);
  }
}

void emit_json(Context& ctx, const Json& j) {
  const std::string text = dump_json(j);
  if (ctx.rc.io.json.empty())
    ctx.out << text;
  else
    write_text(ctx.rc.io.json, text);
}

RepDataset load(const RunConfig& rc, const std::filesystem::path& p) { return read_dataset(p, rc.io.format); }

void cmd_gen(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& io = rc.io;
  Json written = Json::array();
  auto save = [&](const RepDataset& ds, const std::filesystem::path& p) {
    write_dataset(ds, p, io.format);
    written.push_back(p.string());
  };
  const bool pair = !io.weak.empty() || !io.strong.empty();
  require_distinct({}, {io.weak, io.strong, io.output, io.json});
  if (rc.generator == GeneratorKind::toy) {
    require_path(io.weak, "weak");
    require_path(io.strong, "strong");
    const ToyPair tp = gen_toy_pair(rc.toy);
    save(tp.weak, io.weak);
    save(tp.strong, io.strong);
  } else if (rc.generator == GeneratorKind::spiked && pair) {
    require_path(io.weak, "weak");
    require_path(io.strong, "strong");
    save(gen_spiked(rc.spiked.weak), io.weak);
    save(gen_spiked(rc.spiked.strong), io.strong);
  } else if (rc.generator == GeneratorKind::spiked) {
    require_path(io.output, "output");
    save(gen_spiked(rc.spiked.strong), io.output);
  } else {
    require_path(io.output, "output");
    save(gen_bounded(rc.bounded), io.output);
  }
  emit_json(ctx, Json{{"command", "gen"}, {"written", written}});
}

// Population errors when a summary exists, Monte-Carlo on the test split otherwise.
std::optional<double> error_of(const RidgeHead& h, const RepDataset& ds) {
  if (ds.population) return population_error(h, *ds.population).value;
  if (ds.test) return population_error(h, *ds.test).value;
  return std::nullopt;
}

std::optional<Estimate> gap_of(const RidgeHead& w2s, const RidgeHead& sc, const RepDataset& ds) {
  if (ds.population) return pred_gap(w2s, sc, *ds.population);
  if (ds.test) return pred_gap(w2s, sc, *ds.test);
  return std::nullopt;
}

Json eval_json(const RidgeHead& h, const Mat& reps, const Vec& targets, const RepDataset& ds) {
  Json j = to_json(evaluate(h, reps, targets, ds));
  j["head"] = to_json(h);
  return j;
}

void cmd_fit(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& io = rc.io;
  FitOptions opts;
  opts.bias = rc.projection.bias;
  if (io.weak.empty() && io.strong.empty()) {
    require_path(io.input, "input");
    require_distinct({io.input}, {io.json});
    const RepDataset ds = load(rc, io.input);
    opts.role = HeadRole::ceiling;
    const RidgeHead h = fit_head(ds.hat.reps, ds.hat.labels, rc.betas.beta_s, opts);
    emit_json(ctx, Json{{"command", "fit"}, {"ceiling", eval_json(h, ds.hat.reps, ds.hat.labels, ds)}});
    return;
  }
  require_path(io.weak, "weak");
  require_path(io.strong, "strong");
  require_distinct({io.weak, io.strong}, {io.json});
  const RepDataset weak = load(rc, io.weak);
  const RepDataset strong = load(rc, io.strong);
  const Pipeline p = fit_pipeline(weak, strong, rc.betas.beta_w, rc.betas.beta_s, opts.bias);
  Json j;
  j["command"] = "fit";
  j["weak"] = eval_json(p.weak, weak.tilde.reps, weak.tilde.labels, weak);
  j["w2s"] = eval_json(p.w2s, strong.hat.reps, p.weak_hat_predictions, strong);
  j["ceiling"] = eval_json(p.ceiling, strong.hat.reps, strong.hat.labels, strong);
  const auto gap = gap_of(p.w2s, p.ceiling, strong);
  j["predgap"] = gap ? Json(gap->value) : Json(nullptr);
  emit_json(ctx, j);
}

ProjectionOperator side_projection(const RunConfig& rc, const RepDataset& ds, double beta, bool weak_side) {
  const auto& proj = rc.projection;
  const Side side = weak_side ? Side::weak : Side::strong;
  if (proj.mode == SubspaceSource::analytic) {
    const DecompParams dp = gamma_from_config(ds);
    const double gamma = weak_side ? dp.gamma_tilde : dp.gamma_hat;
    return projection_from_subspace(ds.hat.reps, select_analytic(*ds.population), beta + gamma, side);
  }
  const double alpha = weak_side ? proj.alpha_w : proj.alpha_s;
  const double eff = weak_side ? proj.beta_eff_w : proj.beta_eff_s;
  return projection_from_subspace(ds.hat.reps, principal_subspace_select(ds, proj.mode, alpha, proj.bias), eff, side);
}

void cmd_metric(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& io = rc.io;
  require_path(io.weak, "weak");
  require_path(io.strong, "strong");
  require_distinct({io.weak, io.strong}, {io.json});
  const RepDataset weak = load(rc, io.weak);
  const RepDataset strong = load(rc, io.strong);
  const Pipeline p = fit_pipeline(weak, strong, rc.betas.beta_w, rc.betas.beta_s, rc.projection.bias);
  const auto err_sc = error_of(p.ceiling, strong);
  const ProjectionOperator pw = side_projection(rc, weak, rc.betas.beta_w, true);
  const ProjectionOperator ps = side_projection(rc, strong, rc.betas.beta_s, false);
  MetricReport m = w2s_metrics(ps, pw, strong.hat.labels, err_sc);
  m.predgap = gap_of(p.w2s, p.ceiling, strong);
  m.err_w = error_of(p.weak, weak);
  m.err_w2s = error_of(p.w2s, strong);
  Json j = to_json(m);
  j["mode"] = to_string(rc.projection.mode);
  if (m.degenerate_labels) j["warning"] = "labels are identically zero; metrics carry no signal";
  emit_json(ctx, j);
}

void write_csv_if_requested(const RunConfig& rc, const SweepResult& sweep) {
  if (!rc.io.csv.empty()) write_text(rc.io.csv, sweep_csv(sweep));
}

void cmd_validate(Context& ctx) {
  const auto& rc = ctx.rc;
  require_distinct({}, {rc.io.json, rc.io.csv});
  Json j;
  if (rc.target == "thm31") {
    const auto r = run_thm31(rc.pair(), rc.seeds, rc.betas);
    j = to_json(r);
    write_csv_if_requested(rc, r.sweep);
  } else if (rc.target == "benign") {
    if (rc.generator != GeneratorKind::toy) throw Error(Errc::ConfigViolation, "benign validation needs the toy generator");
    const auto r = run_benign(rc.toy, rc.seeds, rc.betas);
    j = to_json(r);
    write_csv_if_requested(rc, r.sweep);
  } else if (rc.target == "pythagoras") {
    const auto r = run_pythagoras(rc.pair(), rc.seeds, rc.betas);
    j = to_json(r);
    write_csv_if_requested(rc, r.sweep);
  } else {
    throw Error(Errc::Usage, "validate needs a target: thm31, benign or pythagoras");
  }
  Json head;
  head["command"] = "validate";
  head["target"] = rc.target;
  head["seeds"] = rc.seeds.count;
  head["master_seed"] = rc.seeds.master;
  head.update(j);
  emit_json(ctx, head);
}

void cmd_sweep(Context& ctx) {
  const auto& rc = ctx.rc;
  if (rc.generator != GeneratorKind::toy) throw Error(Errc::ConfigViolation, "sweep needs the toy generator");
  require_path(rc.io.csv, "csv");
  require_distinct({}, {rc.io.csv, rc.io.json});
  const auto r = run_metric_sweep(rc.toy, rc.grid, rc.seeds, rc.betas, rc.projection);
  write_text(rc.io.csv, sweep_csv(r.sweep));
  Json head;
  head["command"] = "sweep";
  head["master_seed"] = rc.seeds.master;
  head.update(to_json(r));
  emit_json(ctx, head);
}

void cmd_report(Context& ctx) {
  const auto& io = ctx.rc.io;
  const auto& in = io.input.empty() ? io.csv : io.input;
  require_path(in, "input");
  require_path(io.svg, "svg");
  require_distinct({in}, {io.svg});
  emit_scatter(in, io.svg, io.metric_column);
  ctx.out << "wrote " << io.svg.string() << "\n";
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (kind_of(err->code())) {
      case ErrorKind::usage: return 1;
      case ErrorKind::config: return 2;
      case ErrorKind::data: return 3;
      case ErrorKind::numerical: return 4;
    }
  }
  if (dynamic_cast<const std::bad_alloc*>(&e)) return 4;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 3;
  return 3;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak-to-strong generalization: generators, ridge heads, projection metrics and harnesses", "w2s"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string target;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "configuration file")->required();
    sub->add_option("--set", overrides, "override a config value: section.key=value");
  };
  auto* gen = app.add_subcommand("gen", "generate representation datasets");
  auto* fit = app.add_subcommand("fit", "fit weak, W2S and ceiling heads");
  auto* metric = app.add_subcommand("metric", "projection metrics and bounds for a weak/strong pair");
  auto* validate = app.add_subcommand("validate", "run a seeded validation harness");
  auto* sweep = app.add_subcommand("sweep", "metric-vs-error sweep over weak models");
  auto* report = app.add_subcommand("report", "SVG scatter from a sweep CSV");
  for (auto* sub : {gen, fit, metric, validate, sweep, report}) add_common(sub);
  validate->add_option("target", target, "thm31 | benign | pythagoras")->required()->check(
      CLI::IsMember({"thm31", "benign", "pythagoras"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "w2s: usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    IniConfig ini = IniConfig::load(config_path);
    for (const auto& o : overrides) ini.set(o);
    std::optional<std::string> env_seed;
    if (const char* s = std::getenv("W2S_SEED"); s && *s) env_seed = s;
    Context ctx{build_run_config(ini, env_seed), out};
    auto* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    if (!ctx.rc.command.empty() && ctx.rc.command != command)
      throw Error(Errc::ConfigViolation, "config run.command = '" + ctx.rc.command + "' but '" + command + "' was invoked");
    ctx.rc.command = command;
    if (command == "validate") {
      if (!ctx.rc.target.empty() && ctx.rc.target != target)
        throw Error(Errc::ConfigViolation, "config run.target = '" + ctx.rc.target + "' but '" + target + "' was requested");
      ctx.rc.target = target;
    }
    if (command == "gen") cmd_gen(ctx);
    else if (command == "fit") cmd_fit(ctx);
    else if (command == "metric") cmd_metric(ctx);
    else if (command == "validate") cmd_validate(ctx);
    else if (command == "sweep") cmd_sweep(ctx);
    else cmd_report(ctx);
    return 0;
  } catch (const std::exception& e) {
    err << "w2s: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace w2s
