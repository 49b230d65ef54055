#include "w2s/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace w2s {
namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"command", "target"}},
      {"generator",
       {"kind", "eta_w", "eta_s", "d", "k", "sigma2", "weak_sigma2", "n_hat", "n_tilde", "n_test", "label_coupling",
        "weak_label_coupling", "tail_family", "B", "q", "C", "label_share", "mc_samples"}},
      {"beta", {"beta_w", "beta_s", "beta_eff_w", "beta_eff_s"}},
      {"projection", {"mode", "alpha_w", "alpha_s", "bias"}},
      {"seeds", {"master", "count"}},
      {"sweep", {"grid"}},
      {"io", {"input", "output", "weak", "strong", "format", "json", "csv", "svg", "metric_column"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (!quoted && (line[i] == '#' || line[i] == ';')) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key, const std::string& value,
                            const char* what) {
  throw Error(Errc::ConfigViolation, section + "." + key + " = '" + value + "' is not " + what);
}

double to_double(const std::string& section, const std::string& key, const std::string& value) {
  double v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(section, key, value, "a finite number");
  return v;
}

std::uint64_t to_u64(const std::string& section, const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(section, key, value, "a nonnegative integer");
  return v;
}

}  // namespace

void IniConfig::put(const std::string& section, const std::string& key, const std::string& value,
                    const std::string& where) {
  const auto sec = known_keys().find(section);
  if (sec == known_keys().end()) throw Error(Errc::ConfigViolation, where + ": unknown section [" + section + "]");
  if (!sec->second.count(key)) throw Error(Errc::ConfigViolation, where + ": unknown key '" + section + "." + key + "'");
  values_[section][key] = value;
}

IniConfig IniConfig::parse(const std::string& text, const std::string& origin) {
  IniConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::ConfigViolation, where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section)) throw Error(Errc::ConfigViolation, where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::ConfigViolation, where + ": expected key = value");
    if (section.empty()) throw Error(Errc::ConfigViolation, where + ": key outside of any section");
    cfg.put(section, trim(line.substr(0, eq)), unquote(trim(line.substr(eq + 1))), where);
  }
  return cfg;
}

IniConfig IniConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigViolation, "cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void IniConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw Error(Errc::Usage, "override '" + assignment + "' must look like section.key=value");
  put(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
      unquote(trim(assignment.substr(eq + 1))), "override");
}

bool IniConfig::has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

std::optional<std::string> IniConfig::raw(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string IniConfig::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return raw(section, key).value_or(fallback);
}

double IniConfig::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = raw(section, key);
  return v ? to_double(section, key, *v) : fallback;
}

Index IniConfig::get_index(const std::string& section, const std::string& key, Index fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  const std::uint64_t u = to_u64(section, key, *v);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<Index>::max())) bad_value(section, key, *v, "in range");
  return static_cast<Index>(u);
}

std::uint64_t IniConfig::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(section, key);
  return v ? to_u64(section, key, *v) : fallback;
}

bool IniConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(section, key, *v, "a boolean");
}

std::vector<double> IniConfig::get_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  auto v = raw(section, key);
  if (!v) return fallback;
  std::string text = trim(*v);
  if (text.size() >= 2 && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(section, key, item));
  }
  return out;
}

double RunConfig::noise_scale() const {
  switch (generator) {
    case GeneratorKind::toy: return toy.sigma2 / static_cast<double>(toy.n_hat);
    case GeneratorKind::spiked: return spiked.strong.sigma2 / static_cast<double>(spiked.strong.n_hat);
    case GeneratorKind::bounded: return 1.0 / static_cast<double>(bounded.n_hat);
  }
  return 0.0;
}

PairConfig RunConfig::pair() const {
  if (generator == GeneratorKind::toy) return toy;
  if (generator == GeneratorKind::spiked) return spiked;
  throw Error(Errc::ConfigViolation, "this command needs a toy or spiked generator");
}

RunConfig build_run_config(const IniConfig& ini, const std::optional<std::string>& seed_override) {
  RunConfig rc;
  rc.command = ini.get_string("run", "command", "");
  rc.target = ini.get_string("run", "target", "");

  const std::string kind = ini.get_string("generator", "kind", "toy");
  if (kind == "toy")
    rc.generator = GeneratorKind::toy;
  else if (kind == "spiked")
    rc.generator = GeneratorKind::spiked;
  else if (kind == "bounded")
    rc.generator = GeneratorKind::bounded;
  else
    throw Error(Errc::ConfigViolation, "generator.kind = '" + kind + "' is not one of toy, spiked, bounded");

  rc.seeds.master = ini.get_u64("seeds", "master", 0);
  if (seed_override) rc.seeds.master = to_u64("env", "W2S_SEED", *seed_override);
  rc.seeds.count = ini.get_index("seeds", "count", 20);
  if (rc.seeds.count < 1) throw Error(Errc::ConfigViolation, "seeds.count must be positive");

  auto& t = rc.toy;
  t.eta_w = ini.get_double("generator", "eta_w", t.eta_w);
  t.eta_s = ini.get_double("generator", "eta_s", t.eta_s);
  t.d = ini.get_index("generator", "d", t.d);
  t.sigma2 = ini.get_double("generator", "sigma2", t.sigma2);
  t.n_hat = ini.get_index("generator", "n_hat", t.n_hat);
  t.n_tilde = ini.get_index("generator", "n_tilde", t.n_tilde);
  t.n_test = ini.get_index("generator", "n_test", t.n_test);
  t.seed = rc.seeds.master;

  auto& s = rc.spiked.strong;
  s.k = ini.get_index("generator", "k", 1);
  s.d = ini.get_index("generator", "d", 1000);
  s.sigma2 = ini.get_double("generator", "sigma2", 1.0);
  s.n_hat = ini.get_index("generator", "n_hat", 128);
  s.n_tilde = ini.get_index("generator", "n_tilde", 128);
  s.n_test = ini.get_index("generator", "n_test", 0);
  s.tail_family = tail_family_from_string(ini.get_string("generator", "tail_family", "gaussian"));
  s.label_coupling = ini.get_list("generator", "label_coupling", {});
  s.seed = rc.seeds.master;
  s.stream_tag = "spiked/strong";
  auto& w = rc.spiked.weak;
  w = s;
  w.sigma2 = ini.get_double("generator", "weak_sigma2", s.sigma2);
  w.label_coupling = ini.get_list("generator", "weak_label_coupling", s.label_coupling);
  w.stream_tag = "spiked/weak";

  auto& b = rc.bounded;
  b.B = ini.get_double("generator", "B", b.B);
  b.q = ini.get_index("generator", "q", b.q);
  b.d = ini.get_index("generator", "d", b.d);
  b.C = ini.get_double("generator", "C", b.C);
  b.n_hat = ini.get_index("generator", "n_hat", b.n_hat);
  b.n_tilde = ini.get_index("generator", "n_tilde", b.n_tilde);
  b.n_test = ini.get_index("generator", "n_test", b.n_test);
  b.label_share = ini.get_double("generator", "label_share", b.label_share);
  b.mc_samples = ini.get_index("generator", "mc_samples", b.mc_samples);
  b.seed = rc.seeds.master;

  switch (rc.generator) {
    case GeneratorKind::toy: t.validate(); break;
    case GeneratorKind::spiked: rc.spiked.validate(); break;
    case GeneratorKind::bounded: b.validate(); break;
  }

  const double scale = rc.noise_scale();
  rc.betas.beta_w = ini.get_double("beta", "beta_w", 1e-6 * scale);
  rc.betas.beta_s = ini.get_double("beta", "beta_s", 1e-6 * scale);
  if (rc.betas.beta_w < 0 || rc.betas.beta_s < 0) throw Error(Errc::ConfigViolation, "betas must be nonnegative");

  auto& p = rc.projection;
  p.mode = subspace_source_from_string(ini.get_string("projection", "mode", "pca"));
  p.alpha_w = ini.get_double("projection", "alpha_w", 0.1);
  p.alpha_s = ini.get_double("projection", "alpha_s", 0.1);
  p.bias = ini.get_bool("projection", "bias", false);
  p.beta_eff_w = ini.get_double("beta", "beta_eff_w", scale);
  p.beta_eff_s = ini.get_double("beta", "beta_eff_s", scale);
  for (double a : {p.alpha_w, p.alpha_s})
    if (a < 0 || a > 1) throw Error(Errc::ConfigViolation, "projection alphas must lie in [0, 1]");
  if (!(p.beta_eff_w > 0) || !(p.beta_eff_s > 0)) throw Error(Errc::ConfigViolation, "beta_eff must be positive");

  rc.grid = ini.get_list("sweep", "grid", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});

  auto& io = rc.io;
  io.input = ini.get_string("io", "input", "");
  io.output = ini.get_string("io", "output", "");
  io.weak = ini.get_string("io", "weak", "");
  io.strong = ini.get_string("io", "strong", "");
  io.json = ini.get_string("io", "json", "");
  io.csv = ini.get_string("io", "csv", "");
  io.svg = ini.get_string("io", "svg", "");
  io.format = dataset_format_from_string(ini.get_string("io", "format", "binary"));
  io.metric_column = ini.get_string("io", "metric_column", io.metric_column);
  return rc;
}

}  // namespace w2s
