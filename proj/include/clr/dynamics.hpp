#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "clr/dataset.hpp"
#include "clr/losses.hpp"
#include "clr/network.hpp"

namespace clr {

enum class FlowMode { Vanilla, KernelExact, WeightSpace, ClusteredApprox, InfiniteWidth };

FlowMode parse_flow_mode(std::string_view name);
std::string_view to_string(FlowMode mode);

struct FlowConfig {
  FlowMode mode = FlowMode::Vanilla;
  double step = 0.1;  // σ_step
  int max_steps = 100;
  int record_stride = 1;
  /// Renormalize to the unit sphere after each latent step (vanilla, kernel,
  /// clustered modes). Weight-space mode never projects.
  bool sphere_projection = true;
  /// Weight-space and kernel-exact modes: evaluate the loss on f/‖f‖.
  bool normalize_embedding = false;
  /// Kernel-exact mode: keep K at its initial value.
  bool frozen_kernel = false;
  /// Step-halving attempts per weight-space step before the run stalls.
  int max_halvings = 20;
  /// Perturbation draws per invariance measurement.
  int invariance_samples = 64;

  void validate() const;
};

struct StepDiagnostics {
  double loss = 0.0;
  double max_grad = 0.0;        // tangential norm in sphere or normalized modes
  double invariance_dev = 0.0;  // 0 for pure latent flows
  double coherence = 0.0;       // NaN without labels
  double uniformity = 0.0;      // NaN outside d in {2, 3}
};

struct Trajectory {
  std::vector<int> times;
  std::vector<Eigen::MatrixXd> states;  // d x n each
  std::vector<StepDiagnostics> diagnostics;
  bool stalled = false;  // weight-space step halving exhausted

  std::size_t size() const { return times.size(); }
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int step, double loss);
  int step() const { return step_; }
  double loss() const { return loss_; }

 private:
  int step_;
  double loss_;
};

/// z_i - σ ∇L(z_i) for every point, optionally renormalized.
LatentConfiguration step_vanilla(const LatentConfiguration& z, const SimilarityConfig& cfg,
                                 double step, bool sphere_projection = false);

/// -(σ/n) Σ_j K_ij ∇L(z_j) for every i, as a d x n matrix.
Eigen::MatrixXd kernel_increment(const LatentConfiguration& z, const KernelMatrix& K,
                                 const SimilarityConfig& cfg, double step);

LatentConfiguration step_kernel(const LatentConfiguration& z, const KernelMatrix& K,
                                const SimilarityConfig& cfg, double step,
                                bool sphere_projection = false);

/// Thm-4.5 style coefficients for every cluster q.
struct ClusterFlowParams {
  std::vector<Eigen::VectorXd> beta;  // diagonal of β_q
  Eigen::VectorXd mass;               // n_q / n
  Eigen::VectorXd center_sq_norm;     // ‖ξ_q‖²
  std::vector<int> representative;    // first point of each cluster
  std::vector<int> assignment;

  int num_clusters() const { return static_cast<int>(mass.size()); }
};

/// β^k_q = (1/M) Σ_{p in block k} σ'(b_p · ξ_q)².
ClusterFlowParams cluster_params_from_net(const OneHiddenNet& net, const ClusteredDataset& data);
/// Infinite-width relu limit β_q = ½ I.
ClusterFlowParams cluster_params_infinite(const ClusteredDataset& data, int output_dim);

/// Every point moves by -σ mass_q ‖ξ_q‖² β_q ∇L(z_rep(q)).
LatentConfiguration step_clustered(const LatentConfiguration& z, const ClusterFlowParams& params,
                                   const SimilarityConfig& cfg, double step,
                                   bool sphere_projection = false);

/// max over sampled (x_i, T) of ‖f(T x_i) - f(x_i)‖. Sample s uses point
/// s mod n.
double monitor_invariance(const Embedding& f, const ClusteredDataset& data,
                          const PerturbationSet& perturb, int samples, std::uint64_t seed = 0);

/// Mean silhouette of the points under the labels, using Euclidean
/// distances. Singletons score from their between-cluster distance alone;
/// all-coincident configurations score 0. Needs at least two labels.
double cluster_coherence(const Eigen::MatrixXd& z, const std::vector<int>& labels);

/// Kolmogorov-Smirnov distance between the pairwise-angle distribution of the
/// normalized points and the angle law of the uniform measure on S^1 or S^2.
double uniformity_score(const Eigen::MatrixXd& z);

/// Diagnostics of one latent state. `labels` may be empty.
StepDiagnostics diagnose(const LatentConfiguration& z, const SimilarityConfig& cfg,
                         const std::vector<int>& labels, bool normalized_view);

/// Latent flows: vanilla, frozen-kernel (needs `K`) and the clustered modes
/// (need `params`).
Trajectory run_latent(const LatentConfiguration& z0, const SimilarityConfig& cfg,
                      const FlowConfig& flow, const std::vector<int>& labels = {},
                      const KernelMatrix* K = nullptr, const ClusterFlowParams* params = nullptr);

template <class Net>
struct WeightSpaceResult {
  Trajectory trajectory;
  Net final_net;
};

/// Explicit Euler on the weights for 𝓛(w) = L(f(w, x_1), ..., f(w, x_n)).
/// A step that raises the loss is halved up to flow.max_halvings times; when
/// every attempt fails the run stops with `stalled` set. In kernel-exact mode
/// the latent state instead follows the kernel formula with K(w) recomputed
/// from the evolving weights (or held at K(w_0) when frozen_kernel is set).
/// Throws DivergenceError on a non-finite loss or loss > 1e6.
template <class Net>
WeightSpaceResult<Net> run_weight_space(const Net& net, const ClusteredDataset& data,
                                        const PerturbationSet& perturb,
                                        const SimilarityConfig& cfg, const FlowConfig& flow);

/// Latent loss and its gradient w.r.t. the raw outputs Z (d x n): returns
/// ∂L/∂Z, with the normalization chain rule applied when `normalized`.
double latent_loss_and_gradient(const Eigen::MatrixXd& Z, const SimilarityConfig& cfg,
                                bool normalized, Eigen::MatrixXd* dZ);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t);
void write_states_csv(const std::filesystem::path& path, const Trajectory& t);

}  // namespace clr
