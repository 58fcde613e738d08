#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "clr/experiments.hpp"

namespace clr {

inline constexpr int kConfigSchemaVersion = 1;

struct SweepSettings {
  int k_min = 1;
  int k_max = 64;
  int points_per_location = 1;
  int clusters = 2;  // K for the distance and τ sweeps
  int distance_points = 41;
  std::vector<double> taus{0.05, 0.1, 0.2, 0.5};
  std::vector<double> tau_grid;  // empty: 13 values over [0.02, 0.5]
  double plateau_fraction = 0.01;
  double knee_fraction = 0.05;
  double min_r2 = 0.95;
};

struct KernelSettings {
  std::vector<int> widths{64, 256, 1024, 4096};
  std::vector<double> angles;  // empty: {0, π/4, π/2}
  int seeds = 20;
  int output_dim = 4;
  double ratio_min = 2.5;
  double ratio_max = 6.5;
};

struct GradientSettings {
  int instances = 20;
  double fd_step = 1e-5;
  double tolerance = 1e-5;
};

struct StationaritySettings {
  std::filesystem::path input;
  double tolerance = 1e-8;
};

/// Versioned experiment description. Unknown keys are rejected at every level.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  OutputFormat format = OutputFormat::Both;
  double tau = 0.1;
  PsiKind psi = PsiKind::Log1p;
  SweepSettings sweep;
  CompareConfig compare;
  int repeats = 1;  // compare-dynamics: independent seeds seed, seed+1, ...
  double required_fraction = 0.8;
  KernelSettings kernel;
  GradientSettings gradients;
  StationaritySettings stationarity;
};

/// Throws std::invalid_argument naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::vector<CheckResult> checks;
  std::vector<std::filesystem::path> files;
  nlohmann::json results;

  bool passed() const;
};

/// Runs the experiment, writes its data, plots and manifest under
/// config.output_dir, and returns the in-run assertions.
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace clr
