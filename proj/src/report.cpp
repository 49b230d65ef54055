#include "w2s/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace w2s {
namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json vec_json(const std::vector<double>& v) { return Json(v); }

Json eigen_json(const Vec& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

void dump(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump(it.value(), indent, depth + 1, out);
      }
      out += close;
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        dump(v, indent, depth + 1, out);
      }
      out += close;
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format17(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double parse_cell(const std::string& cell, const std::string& column) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw Error(Errc::NonFiniteEntry, "column '" + column + "' holds a non-numeric value '" + cell + "'");
  return v;
}

}  // namespace

std::string format17(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  out += '\n';
  return out;
}

Json to_json(const MetricReport& r) {
  Json j;
  j["predgap"] = r.predgap ? Json(r.predgap->value) : Json(nullptr);
  j["predgap_stderr"] = r.predgap ? Json(r.predgap->std_error) : Json(nullptr);
  j["theory_rhs"] = r.theory_rhs;
  j["norm_ps_ipw"] = r.norm_ps_ipw;
  j["norm_ps_ipw_ps"] = r.norm_ps_ipw_ps;
  j["bound1"] = r.bound1;
  j["bound2"] = opt(r.bound2);
  j["C"] = r.C;
  j["err_w"] = opt(r.err_w);
  j["err_w2s"] = opt(r.err_w2s);
  j["err_sc"] = opt(r.err_sc);
  j["degenerate_labels"] = r.degenerate_labels;
  return j;
}

Json to_json(const DecompParams& p) {
  return Json{{"delta", p.delta}, {"gamma_hat", p.gamma_hat}, {"gamma_tilde", p.gamma_tilde},
              {"gamma", p.gamma}, {"rho", p.rho}};
}

Json to_json(const DecompReport& r) {
  Json j;
  const auto& a = r.a_bounds;
  j["a_bounds"] = {{"sigma_norm", a.sigma_norm},         {"sigma_hat_norm", a.sigma_hat_norm},
                   {"sigma_tilde_norm", a.sigma_tilde_norm}, {"e_y2", a.e_y2},
                   {"mean_y_hat2", a.mean_y_hat2},       {"mean_y_tilde2", a.mean_y_tilde2}};
  const auto& b = r.b_concentration;
  j["b_concentration"] = {{"cov_hat", b.cov_hat},
                          {"cov_tilde", b.cov_tilde},
                          {"cross_hat", b.cross_hat},
                          {"cross_tilde", b.cross_tilde}};
  j["c_isotropy"] = {{"hat", r.c_isotropy.hat}, {"tilde", r.c_isotropy.tilde}};
  j["d_cross"] = r.d_cross;
  j["e_tail"] = r.e_tail;
  j["params"] = to_json(r.params);
  const auto& s = r.scales;
  j["scales"] = {{"concentration_cov", s.concentration_cov},
                 {"concentration_cross", s.concentration_cross},
                 {"isotropy", s.isotropy},
                 {"cross", s.cross},
                 {"tail", s.tail}};
  const auto& q = r.ratios;
  j["ratios"] = {{"concentration_cov", opt(q.concentration_cov)},
                 {"concentration_cross", opt(q.concentration_cross)},
                 {"isotropy", opt(q.isotropy)},
                 {"cross", opt(q.cross)},
                 {"tail", opt(q.tail)}};
  j["population_estimated"] = r.population_estimated;
  return j;
}

Json to_json(const RidgeHead& h) {
  return Json{{"role", to_string(h.role)}, {"beta", h.beta}, {"bias", h.bias}, {"weights", eigen_json(h.weights)}};
}

Json to_json(const EvalReport& r) {
  Json j;
  j["err_train"] = r.err_train;
  j["err_test"] = opt(r.err_test);
  j["err_population"] = r.err_population ? Json(r.err_population->value) : Json(nullptr);
  return j;
}

Json to_json(const SweepResult& r) {
  Json j;
  Json agg = Json::array();
  for (const auto& m : r.aggregates) {
    Json row;
    row["config_id"] = m.config_id;
    row["count"] = m.seed;
    for (const auto& c : sweep_columns())
      if (c != "config_id" && c != "seed") row[c] = sweep_value(m, c);
    agg.push_back(std::move(row));
  }
  j["aggregates"] = std::move(agg);
  Json rho = Json::object();
  for (const auto& [k, v] : r.spearman) rho[k] = v;
  j["spearman"] = std::move(rho);
  Json per = Json::object();
  for (const auto& [k, v] : r.spearman_per_seed) per[k] = vec_json(v);
  j["spearman_per_seed"] = std::move(per);
  return j;
}

Json to_json(const Thm31Report& r) {
  Json j;
  j["mean_abs_gap"] = r.mean_abs_gap;
  j["max_bound1_excess"] = r.max_bound1_excess;
  j["max_bound2_excess"] = r.max_bound2_excess;
  j["abs_gap"] = vec_json(r.abs_gap);
  j["sweep"] = to_json(r.sweep);
  return j;
}

Json to_json(const BenignReport& r) {
  Json j;
  j["mean_err_w"] = r.mean_err_w;
  j["mean_err_w_hat"] = r.mean_err_w_hat;
  j["mean_err_w2s"] = r.mean_err_w2s;
  j["mean_err_sc"] = r.mean_err_sc;
  j["max_train_mse_w2s"] = r.max_train_mse_w2s;
  j["mean_delta"] = r.mean_delta;
  j["mean_coef_y"] = r.mean_coef_y;
  j["mean_coef_zeta"] = r.mean_coef_zeta;
  j["mean_realized_coef_y"] = r.mean_realized_coef_y;
  j["mean_realized_coef_zeta"] = r.mean_realized_coef_zeta;
  j["err_w_hat"] = vec_json(r.err_w_hat);
  j["coef_y"] = vec_json(r.coef_y);
  j["coef_zeta"] = vec_json(r.coef_zeta);
  j["sweep"] = to_json(r.sweep);
  return j;
}

Json to_json(const PythagorasReport& r) {
  Json j;
  j["precondition_ratio"] = r.precondition_ratio;
  j["mean_residual"] = r.mean_residual;
  j["min_triangle_slack"] = r.min_triangle_slack;
  j["residual"] = vec_json(r.residual);
  j["triangle_slack"] = vec_json(r.triangle_slack);
  j["sweep"] = to_json(r.sweep);
  return j;
}

Json to_json(const MetricSweepReport& r) {
  Json j;
  j["weak_grid"] = vec_json(r.weak_grid);
  j["mean_rho_norm_ps_ipw"] = r.mean_rho_norm_ps_ipw;
  j["mean_rho_norm_ps_ipw_ps"] = r.mean_rho_norm_ps_ipw_ps;
  j["sweep"] = to_json(r.sweep);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for '" + path.string() + "'");
}

std::string sweep_csv(const SweepResult& r) {
  std::string out;
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& row : r.rows) {
    out += row.config_id;
    out += ',' + std::to_string(row.seed);
    for (std::size_t i = 2; i < cols.size(); ++i) out += ',' + format17(sweep_value(row, cols[i]));
    out += '\n';
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(Errc::MissingColumn, "sweep CSV has no column '" + name + "'");
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw Error(Errc::DimensionMismatch, "'" + path.string() + "' has a row with the wrong number of cells");
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw Error(Errc::EmptySweep, "'" + path.string() + "' is empty");
  return t;
}

std::string render_scatter(const CsvTable& table, const std::string& metric_column) {
  const std::size_t xi = table.column(metric_column);
  const std::size_t yi = table.column("err_w2s");
  if (table.rows.empty()) throw Error(Errc::EmptySweep, "sweep has no rows");

  // Mean per config_id in first-appearance order, or one point per row.
  std::vector<std::pair<double, double>> points;
  const auto id_it = std::find(table.header.begin(), table.header.end(), "config_id");
  if (id_it != table.header.end()) {
    const auto ii = static_cast<std::size_t>(id_it - table.header.begin());
    std::vector<std::string> order;
    std::map<std::string, std::array<double, 3>> acc;
    for (const auto& row : table.rows) {
      auto [it, fresh] = acc.try_emplace(row[ii], std::array<double, 3>{0, 0, 0});
      if (fresh) order.push_back(row[ii]);
      it->second[0] += parse_cell(row[xi], metric_column);
      it->second[1] += parse_cell(row[yi], "err_w2s");
      it->second[2] += 1;
    }
    for (const auto& id : order) {
      const auto& a = acc.at(id);
      points.emplace_back(a[0] / a[2], a[1] / a[2]);
    }
  } else {
    for (const auto& row : table.rows)
      points.emplace_back(parse_cell(row[xi], metric_column), parse_cell(row[yi], "err_w2s"));
  }

  std::string rho_text = "n/a";
  if (points.size() >= 2) {
    Vec x(static_cast<Index>(points.size()));
    Vec y(x.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      x(static_cast<Index>(i)) = points[i].first;
      y(static_cast<Index>(i)) = points[i].second;
    }
    try {
      rho_text = svg_num(spearman(x, y));
    } catch (const Error& e) {
      if (e.code() != Errc::ConstantInput) throw;
    }
  }

  constexpr double width = 640, height = 480, left = 80, right = 30, top = 50, bottom = 60;
  double x0 = points[0].first, x1 = x0, y0 = points[0].second, y1 = y0;
  for (const auto& [x, y] : points) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double margin = span > 0 ? 0.05 * span : std::max(0.5, 0.05 * std::abs(lo));
    lo -= margin;
    hi += margin;
  };
  pad(x0, x1);
  pad(y0, y1);
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  const std::string xlabel = xml_escape(metric_column);
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"480\" viewBox=\"0 0 640 "
       "480\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">err_w2s vs " +
       xlabel + " (rho=" + rho_text + ")</text>\n";
  s += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top + ph) + "\" x2=\"" + svg_num(left + pw) + "\" y2=\"" +
       svg_num(top + ph) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top) + "\" x2=\"" + svg_num(left) + "\" y2=\"" +
       svg_num(top + ph) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    s += "<text x=\"" + svg_num(sx(fx)) + "\" y=\"" + svg_num(top + ph + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + svg_num(fx) + "</text>\n";
    s += "<text x=\"" + svg_num(left - 6) + "\" y=\"" + svg_num(sy(fy) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + svg_num(fy) + "</text>\n";
  }
  s += "<text x=\"" + svg_num(left + pw / 2) + "\" y=\"" + svg_num(height - 15) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + xlabel + "</text>\n";
  s += "<text x=\"20\" y=\"" + svg_num(top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 20 " + svg_num(top + ph / 2) + ")\">err_w2s</text>\n";
  for (const auto& [x, y] : points)
    s += "<circle cx=\"" + svg_num(sx(x)) + "\" cy=\"" + svg_num(sy(y)) + "\" r=\"4\" fill=\"steelblue\"/>\n";
  s += "</svg>\n";
  return s;
}

void emit_scatter(const std::filesystem::path& sweep_csv_path, const std::filesystem::path& out_svg_path,
                  const std::string& metric_column) {
  write_text(out_svg_path, render_scatter(read_csv_table(sweep_csv_path), metric_column));
}

}  // namespace w2s
