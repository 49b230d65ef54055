#pragma once

// JSON / CSV / SVG emission for reports and sweeps.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "w2s/harness.hpp"

namespace w2s {

using Json = nlohmann::ordered_json;

/// Shortest decimal that keeps 17 significant digits ("%.17g" semantics).
std::string format17(double v);

/// Deterministic JSON text: doubles at 17 significant digits, non-finite as null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const MetricReport& r);
Json to_json(const DecompParams& p);
Json to_json(const DecompReport& r);
Json to_json(const RidgeHead& h);
Json to_json(const EvalReport& r);
Json to_json(const SweepResult& r);  // aggregates and spearman, not the rows
Json to_json(const Thm31Report& r);
Json to_json(const BenignReport& r);
Json to_json(const PythagorasReport& r);
Json to_json(const MetricSweepReport& r);

void write_text(const std::filesystem::path& path, const std::string& text);

std::string sweep_csv(const SweepResult& r);

/// A CSV table with a header row, cells kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws MissingColumn.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

/// SVG scatter of `metric_column` (x) against err_w2s (y), one point per
/// config_id (mean over seeds) or per row when there is no config_id column.
std::string render_scatter(const CsvTable& table, const std::string& metric_column);

void emit_scatter(const std::filesystem::path& sweep_csv_path, const std::filesystem::path& out_svg_path,
                  const std::string& metric_column);

}  // namespace w2s
