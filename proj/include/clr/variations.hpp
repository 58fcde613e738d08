#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "clr/dataset.hpp"
#include "clr/losses.hpp"

namespace clr {

/// Gradient of the latent loss at every point.
///
/// `euclidean.col(i)` is the functional gradient
///   ∇L(z_i) = Σ_j w_j (Ψ'(G_i) + Ψ'(G_j)) η'(‖z_i - z_j‖²/2) (z_i - z_j) / η(0),
/// which for uniform weights equals n ∂L/∂z_i. In sphere mode `tangential`
/// holds the projection onto the tangent space at z_i; otherwise it is a copy
/// of `euclidean`.
struct VariationReport {
  Eigen::MatrixXd euclidean;
  Eigen::MatrixXd tangential;
  Eigen::VectorXd lambda;  // λ_i = <∇L(z_i), z_i>
  double max_gradient_norm = 0.0;
  double max_tangential_norm = 0.0;
  double lambda_spread = 0.0;  // max_i λ_i - min_i λ_i
};

VariationReport invariant_gradient(const LatentConfiguration& z, const SimilarityConfig& cfg);

/// Central differences of generalized_loss, divided by the point weights so
/// the result is comparable with VariationReport::euclidean.
Eigen::MatrixXd finite_difference_gradient(const LatentConfiguration& z,
                                           const SimilarityConfig& cfg, double step = 1e-5);

using Direction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Directional derivative d/dε full_loss_two_view_exact(f + ε h) at ε = 0,
/// summed exactly over the atoms of ν. Throws std::invalid_argument for
/// orthogonal-noise ν.
double first_variation_pairing(const Eigen::MatrixXd& points, const Embedding& embed,
                               const PerturbationSet& perturb, const SimilarityConfig& cfg,
                               const Direction& h);

struct StationarityResult {
  bool stationary = false;
  VariationReport report;
};

/// Sphere-mode certificate: stationary iff max tangential norm <= tol.
StationarityResult stationarity_check(const LatentConfiguration& z, const SimilarityConfig& cfg,
                                      double tol = 1e-8);

struct SecondVariationReport {
  double value = 0.0;
  double sigma = 0.0;  // min over pairs with Δh != 0 of <Δz, Δh>² / ‖Δh‖²
  int num_locations = 0;
  bool condition_satisfied = false;  // σ > 3K²τ and h is not constant
};

/// δ²L(h, h) for Ψ(t) = log(1 + t/2) and η_f(a, b) = exp(-‖a - b‖²/(2τ)),
/// summed exactly over all pairs. `h` is d x n. Throws std::invalid_argument
/// on a shape mismatch.
SecondVariationReport second_variation(const LatentConfiguration& z, double tau,
                                       const Eigen::MatrixXd& h);

/// Same three-term expression for an arbitrary (Ψ, η) pair.
double second_variation_value(const LatentConfiguration& z, const SimilarityConfig& cfg,
                              const Eigen::MatrixXd& h);

/// Max Euclidean gradient norm of the configuration k z for every k in
/// `scales` (unconstrained mode).
std::vector<double> scaled_map_gradient_decay(const LatentConfiguration& z,
                                              const SimilarityConfig& cfg,
                                              const std::vector<double>& scales);

/// Distinct locations of a configuration, grouped with tolerance `tol`.
/// Returns the location index of every point.
std::vector<int> group_locations(const Eigen::MatrixXd& points, double tol = 1e-12);

}  // namespace clr
