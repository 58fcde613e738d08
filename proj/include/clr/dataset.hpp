#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace clr {

/// How the noise budget is split between the data manifold (first d
/// coordinates) and its orthogonal complement.
enum class NoiseSplit {
  Split,           // radius δ/2 in each subspace; total stays below δ
  OrthogonalOnly,  // radius δ, orthogonal complement only
  ManifoldOnly,    // radius δ, first d coordinates only
};

struct ClusterSpec {
  int ambient_dim = 3;  // D
  int latent_dim = 2;   // d
  int num_clusters = 2; // N
  std::vector<int> cluster_sizes{1, 1};
  std::vector<double> center_norms{1.0, 1.0};
  double noise_bound = 0.0;  // δ
  std::uint64_t seed = 0;
  NoiseSplit split = NoiseSplit::Split;

  /// Throws std::invalid_argument when a field is inconsistent.
  void validate() const;
  int num_points() const;
};

/// Points x_i = ξ_{γ(i)} + ε_i stored column-wise.
struct ClusteredDataset {
  Eigen::MatrixXd points;   // D x n
  Eigen::MatrixXd centers;  // D x N
  Eigen::MatrixXd noise;    // D x n, points - centers[assignment]
  std::vector<int> assignment;
  int latent_dim = 0;
  double noise_bound = 0.0;

  int size() const { return static_cast<int>(points.cols()); }
  int ambient_dim() const { return static_cast<int>(points.rows()); }
  int num_clusters() const { return static_cast<int>(centers.cols()); }
  std::vector<int> cluster_sizes() const;
  /// max_i ||x_i - ξ_{γ(i)}||.
  double max_noise_norm() const;
};

/// Centers r_q e_q with noise drawn uniformly in balls (see NoiseSplit).
/// Throws std::invalid_argument if N > d or the cluster settings are otherwise invalid.
ClusteredDataset generate(const ClusterSpec& spec);

/// Same noise model around caller-supplied centers (D x N). The centers are
/// not required to be orthogonal; they must lie in the first `latent_dim`
/// coordinates.
ClusteredDataset generate_from_centers(const Eigen::MatrixXd& centers, int latent_dim,
                                       const std::vector<int>& cluster_sizes,
                                       double noise_bound, std::uint64_t seed,
                                       NoiseSplit split = NoiseSplit::Split);

enum class PerturbationMode { OrthogonalNoise, IdentityOnly, FiniteList };

/// The augmentation distribution ν.
struct PerturbationSet {
  PerturbationMode mode = PerturbationMode::IdentityOnly;
  int latent_dim = 0;
  double magnitude = 0.0;
  std::vector<Eigen::VectorXd> draws;  // FiniteList: displacements, uniform weights

  static PerturbationSet identity();
  static PerturbationSet orthogonal_noise(int latent_dim, double magnitude);
  /// Each draw must vanish on the first `latent_dim` coordinates.
  static PerturbationSet finite_list(int latent_dim, std::vector<Eigen::VectorXd> draws);

  /// True when ν is a finite uniform distribution (identity or finite list).
  bool is_exact() const { return mode != PerturbationMode::OrthogonalNoise; }
  /// Number of atoms of an exact ν.
  int atoms() const;
};

/// T(x) for a draw of ν selected by `seed`. OrthogonalNoise adds a uniform
/// ball sample in coordinates d..D-1; FiniteList adds draws[seed % size].
Eigen::VectorXd apply_perturbation(const Eigen::VectorXd& x, const PerturbationSet& p,
                                   std::uint64_t seed);

/// The k-th atom of an exact ν applied to x.
Eigen::VectorXd apply_atom(const Eigen::VectorXd& x, const PerturbationSet& p, int k);

/// CSV with header `idx,cluster,x_0,...,x_{D-1}`.
void write_dataset_csv(const std::filesystem::path& path, const ClusteredDataset& data);
/// Re-import for replay. Centers are recovered as cluster means.
ClusteredDataset read_dataset_csv(const std::filesystem::path& path, int latent_dim);

}  // namespace clr
