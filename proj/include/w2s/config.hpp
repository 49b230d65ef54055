#pragma once

// INI-style run configuration: [section] headers and key = value lines.
// Unknown sections or keys are rejected.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "w2s/harness.hpp"

namespace w2s {

class IniConfig {
 public:
  static IniConfig parse(const std::string& text, const std::string& origin = "<config>");
  static IniConfig load(const std::filesystem::path& path);

  /// Applies "section.key=value"; the key must be known.
  void set(const std::string& assignment);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  Index get_index(const std::string& section, const std::string& key, Index fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

 private:
  void put(const std::string& section, const std::string& key, const std::string& value, const std::string& where);

  std::map<std::string, std::map<std::string, std::string>> values_;
};

enum class GeneratorKind { toy, spiked, bounded };

struct IoPaths {
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path weak;
  std::filesystem::path strong;
  std::filesystem::path json;
  std::filesystem::path csv;
  std::filesystem::path svg;
  DatasetFormat format = DatasetFormat::binary;
  std::string metric_column = "norm_ps_ipw";
};

struct RunConfig {
  std::string command;
  std::string target;
  GeneratorKind generator = GeneratorKind::toy;
  ToyPairConfig toy;
  SpikedPairConfig spiked;
  BoundedConfig bounded;
  Betas betas;
  EmpiricalProjection projection;
  SeedPlan seeds;
  std::vector<double> grid;
  IoPaths io;

  /// sigma^2 / n_hat of the configured generator (the default scale for betas).
  double noise_scale() const;
  PairConfig pair() const;
};

/// Builds a typed configuration. `seed_override` (e.g. from W2S_SEED) replaces seeds.master.
RunConfig build_run_config(const IniConfig& ini, const std::optional<std::string>& seed_override = std::nullopt);

}  // namespace w2s
