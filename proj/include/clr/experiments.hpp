#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "clr/dynamics.hpp"
#include "clr/losses.hpp"
#include "clr/network.hpp"
#include "clr/svg.hpp"

namespace clr {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y ≈ slope x + intercept.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SweepSeries {
  double tau = 0.0;
  std::vector<double> axis;
  std::vector<double> loss;
  std::optional<double> threshold;  // plateau or knee position, when detected
  bool monotone = false;            // loss non-increasing within 1e-12
};

struct SweepResult {
  std::string name;
  std::string axis_label;
  std::string value_label;
  std::vector<SweepSeries> series;
  std::optional<LinearFit> fit;  // τ sweep only
};

/// K evenly spaced locations on S^1, each carrying `points_per_location`
/// points.
LatentConfiguration roots_of_unity(int K, int points_per_location = 1);

/// Loss of K evenly spaced locations for K = k_min..k_max and every τ.
/// Plateau: first K whose decrease to K+1 is below `plateau_fraction` of the
/// total drop over the range.
SweepResult sweep_clusters(int k_min, int k_max, const std::vector<double>& taus,
                           int points_per_location = 1, PsiKind psi = PsiKind::Log1p,
                           double plateau_fraction = 0.01);

/// Largest achievable minimum squared pairwise distance of K points on S^1.
double max_feasible_sq_distance(int K);

/// K points on S^1 with consecutive angle arccos(1 - s/2), so the minimum
/// squared pairwise distance is s. Throws std::invalid_argument when s is out
/// of reach.
Eigen::MatrixXd arc_configuration(int K, double min_sq_distance);

/// Knee of the distance curve: the smallest s with
///   L(s) - Ψ(1/K) <= knee_fraction (L(0) - Ψ(1/K)),
/// where Ψ(1/K) is the loss once all cross terms vanish. Located on a grid and
/// refined by bisection. Empty when the level is not reached on the feasible
/// range.
std::optional<double> min_distance_threshold(int K, double tau, double knee_fraction = 0.05,
                                             PsiKind psi = PsiKind::Log1p);

SweepResult sweep_min_distance(int K, const std::vector<double>& sq_distances,
                               const std::vector<double>& taus, double knee_fraction = 0.05,
                               PsiKind psi = PsiKind::Log1p);

/// (τ, threshold) pairs with a linear fit. τ values whose threshold is out of
/// reach are skipped.
SweepResult sweep_tau_threshold(const std::vector<double>& taus, int K = 2,
                                double knee_fraction = 0.05, PsiKind psi = PsiKind::Log1p);

/// Evenly spaced grid lo, ..., hi with `count` points.
std::vector<double> linspace(double lo, double hi, int count);

struct CompareConfig {
  int n = 200;
  int ambient_dim = 3;
  int latent_dim = 2;
  std::vector<double> centers_x{-3.0, -1.0, 1.0, 3.0};
  double noise_bound = 0.1;
  int width = 256;
  Activation activation = Activation::Tanh;
  std::optional<double> weight_std = 0.2;  // unset: 1/sqrt(ambient_dim)
  bool invariant_init = true;
  double tau = 1.0;
  PsiKind psi = PsiKind::Log1p;
  double kernel_step = 2.0;
  int kernel_steps = 300;
  double vanilla_step = 2.0;
  int vanilla_steps = 500;
  int record_stride = 10;
  double coherence_target = 0.8;
  double uniformity_target = 0.1;
  double stationarity_tol = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CompareResult {
  ClusteredDataset data;
  Trajectory kernel_path;   // weight-space descent through the network
  Trajectory vanilla_path;  // latent descent from the same initial state
  double initial_coherence = 0.0;
  double best_coherence = 0.0;
  double final_coherence = 0.0;
  double vanilla_final_coherence = 0.0;
  int coherence_step = -1;  // first recorded step reaching the target
  double best_uniformity = 1.0;
  double final_uniformity = 1.0;
  int uniformity_step = -1;
  double kernel_final_tangential = 0.0;
  double vanilla_final_tangential = 0.0;

  bool kernel_reached() const { return coherence_step >= 0; }
  bool vanilla_reached() const { return uniformity_step >= 0; }
};

/// Clustered dataset with centers (c, 0, ..., 0), a one-hidden net, and two
/// runs from the same initial latent configuration.
CompareResult compare_dynamics(const CompareConfig& config);

struct KernelConvergence {
  std::vector<int> widths;
  std::vector<double> angles;
  std::vector<double> rms_error;        // pooled over seeds, outputs and angles
  std::vector<double> max_z_score;      // max |mean - K∞| / std-error per width
  double error_ratio = 0.0;             // rms at the first ratio width / second
};

/// Finite-width relu kernel entries K^{kk}_{12}(M) at unit pairs with the given
/// angles versus the arccos limit. Ratio taken between `ratio_widths`.
KernelConvergence kernel_convergence(const std::vector<int>& widths, const std::vector<double>& angles,
                                     int seeds, int output_dim, std::uint64_t seed,
                                     std::pair<int, int> ratio_widths = {256, 4096});

struct GradientCheck {
  int instances = 0;
  double max_gradient_error = 0.0;  // relative, invariant_gradient vs differences
  double max_pairing_error = 0.0;   // relative, first_variation_pairing vs differences
};

/// Random instances with n <= 10 and d <= 4.
GradientCheck check_gradients(int instances, std::uint64_t seed, double fd_step = 1e-5);

/// Latent configuration from a CSV with columns z_0, ..., z_{d-1}; other
/// columns are ignored. When a `step` column is present only the last step
/// is used.
LatentConfiguration read_latent_csv(const std::filesystem::path& path);

enum class OutputFormat { Csv, Svg, Both };
OutputFormat parse_output_format(std::string_view name);
std::string_view to_string(OutputFormat f);

struct Figure {
  std::string stem;
  PlotSpec plot;
};

Figure figure_from_sweep(const SweepResult& sweep);
std::vector<Figure> figures_from_compare(const CompareResult& result);

/// Writes <stem>.svg and/or <stem>.csv (series,x,y) for every figure.
/// Every figure is rendered before anything is written, so an empty figure
/// leaves no partial output.
std::vector<std::filesystem::path> emit_plots(const std::vector<Figure>& figures,
                                              const std::filesystem::path& dir, OutputFormat format);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(std::string_view s);

/// manifest.json with the experiment id, config hash, seed and versions.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::string& experiment,
                                     const nlohmann::json& config, std::uint64_t seed,
                                     const nlohmann::json& results);

}  // namespace clr
