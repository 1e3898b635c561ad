#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pheno/ide_sim.hpp"
#include "pheno/model.hpp"

namespace pheno {

struct RunConfig {
  std::string preset = "lorz2013-modified";
  ModelParams params;
  std::size_t nx = 201;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  std::optional<double> T;
  std::optional<DosePair> dose;
};

/// Keys: preset, params, nx, dt, seed, T, u1, u2. Unknown keys throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j, const std::string& path = "config");
RunConfig load_config(const std::filesystem::path& file);

struct RunManifest {
  std::string command;
  std::string preset;
  nlohmann::json params;
  std::size_t nx = 0;
  double dt = 0;
  nlohmann::json tolerances = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  nlohmann::json extra = nlohmann::json::object();
  double wall_time = 0;

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& dir) const;
};

/// Fixed-precision number formatting shared by all writers.
std::string fmt_num(double v);

void write_totals_csv(std::ostream& os, const Trajectory& tr);
/// Long format: t, x, n_H, n_C per snapshot node.
void write_snapshots_csv(std::ostream& os, const Trajectory& tr);
/// Long format plot bundle: panel, series, x, y.
void write_plot_bundle(std::ostream& os, const Trajectory& tr);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);
void write_text(const std::filesystem::path& file, const std::string& s);

struct FigureOptions {
  std::size_t nx = 201;
  double dt = 1e-3;
  double ocp_steps_per_unit = 20.0;  // figures 4-5
  std::size_t ocp_nx = 101;
  std::uint64_t seed = 0;
};

struct FigureResult {
  int id = 0;
  std::vector<std::string> artifacts;
  nlohmann::json summary;
};

/// Figures 1-7; 2 is the mu_C curve. Writes artifacts and a manifest into out_dir.
FigureResult run_figure(int fig_id, const std::filesystem::path& out_dir, const FigureOptions& opt = {});

}  // namespace pheno
