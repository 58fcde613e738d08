#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "clr/dataset.hpp"

namespace clr {

/// Outer transform Ψ of the generalized loss.
enum class PsiKind {
  Log1p,      // log(1 + t)
  Log1pHalf,  // log(1 + t/2)
  Identity,   // t
};

/// A user-supplied similarity profile η with its first two derivatives.
/// η must be differentiable and maximal at 0.
struct CustomEta {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
};

enum class Constraint { Sphere, Unconstrained };

/// (Ψ, η, τ) plus the constraint set. Without a custom profile η is the
/// exponential decay η(t) = exp(-t/τ), so η(‖a-b‖²/2) = exp(-‖a-b‖²/(2τ)).
struct SimilarityConfig {
  double tau = 0.5;
  PsiKind psi = PsiKind::Log1p;
  std::optional<CustomEta> custom_eta;
  Constraint constraint = Constraint::Sphere;

  double psi_value(double t) const;
  double psi_first(double t) const;
  double psi_second(double t) const;
  double eta_value(double t) const;
  double eta_first(double t) const;
  double eta_second(double t) const;

  /// Throws std::invalid_argument for τ <= 0 or an incomplete custom η.
  void validate() const;
};

PsiKind parse_psi(std::string_view name);
std::string_view to_string(PsiKind kind);

/// A discrete latent measure Σ w_i δ_{z_i}; points are the columns of a d x n
/// matrix.
struct LatentConfiguration {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  LatentConfiguration() = default;
  /// Uniform weights 1/n.
  explicit LatentConfiguration(Eigen::MatrixXd pts);
  LatentConfiguration(Eigen::MatrixXd pts, Eigen::VectorXd w);

  int size() const { return static_cast<int>(points.cols()); }
  int dim() const { return static_cast<int>(points.rows()); }

  /// Throws std::invalid_argument if the weights are not a probability
  /// vector (1e-12) or, in sphere mode, a point is off the unit sphere (1e-9).
  void validate(Constraint constraint) const;
};

/// Unit-norm copies of the columns of `z`. Zero columns throw std::domain_error.
Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& z);

/// Σ_x w_x Ψ( Σ_y w_y η(‖x-y‖²/2) / η(0) ), indicator dropped.
double generalized_loss(const LatentConfiguration& z, const SimilarityConfig& cfg);

/// ‖z_i - z_j‖² for all pairs, summed coordinate by coordinate so that equal
/// columns give exactly 0.
Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& z);

/// G_x = Σ_y w_y η(‖x-y‖²/2) / η(0) for every point.
Eigen::VectorXd similarity_mass(const LatentConfiguration& z, const SimilarityConfig& cfg);

/// Latent form of NT-Xent after invariance:
/// Σ_x w_x log(1 + 2 Σ_{y≠x} w_y exp((sim(x,y) - 1)/τ)), the indicator taken
/// over point indices. On the sphere this equals
/// Σ_x w_x log(1 + 2 (G_x - w_x)) with the exp-decay G of generalized_loss.
double nt_xent_latent(const LatentConfiguration& z, double tau);

using Embedding = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Original NT-Xent with cosine similarity, Monte Carlo over (T, T') ~ ν.
/// Points are the columns of a D x n matrix. Each sample draws one pair of
/// perturbation maps; a stochastic map is keyed by point index. Throws
/// std::domain_error naming the point whose embedding is zero.
McEstimate nt_xent_original(const Eigen::MatrixXd& points, const Embedding& embed,
                            const PerturbationSet& perturb, double tau, int mc_samples,
                            std::uint64_t seed = 0);

/// Two-view generalized loss
///   (1/n) Σ_x E_{T,T'} Ψ( (1/n) Σ_y η_f(Tx, T'y) / η_f(Tx, T'x) ),
/// Monte Carlo over (T, T'). Throws std::invalid_argument when η(0) = 0.
McEstimate full_loss_two_view(const Eigen::MatrixXd& points, const Embedding& embed,
                              const PerturbationSet& perturb, const SimilarityConfig& cfg,
                              int mc_samples, std::uint64_t seed = 0);

/// Same objective with the (T, T') expectation summed exactly over the atoms
/// of a finite ν. Throws std::invalid_argument for orthogonal-noise ν.
double full_loss_two_view_exact(const Eigen::MatrixXd& points, const Embedding& embed,
                                const PerturbationSet& perturb, const SimilarityConfig& cfg);

/// Pluggable VICReg regularizers. Defaults: variance hinge
/// mean_k max(0, 1 - std_k) with the unbiased std, and the sum of squared
/// off-diagonal entries of the unbiased covariance.
struct VicregTerms {
  std::function<double(const Eigen::MatrixXd&)> variance;
  std::function<double(const Eigen::MatrixXd&)> covariance;
  static VicregTerms defaults();
};

double vicreg_variance_default(const Eigen::MatrixXd& z);
double vicreg_covariance_default(const Eigen::MatrixXd& z);

/// λ2 v(z) + λ3 c(z): VICReg after the invariance term vanishes. Needs n >= 2.
double vicreg_latent(const LatentConfiguration& z, double lambda2, double lambda3,
                     const VicregTerms& terms = VicregTerms::defaults());

/// Σ_i w_i ‖q(z_i) - z_i‖²: BYOL with an invariant map.
double byol_latent(const LatentConfiguration& z,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& q);

}  // namespace clr
