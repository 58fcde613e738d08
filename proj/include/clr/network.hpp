#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace clr {

enum class Activation { Relu, Tanh, SmoothRelu, Identity };

/// σ(u). SmoothRelu is softplus log(1 + e^u).
double activate(Activation a, double u);
/// σ'(u), with relu'(0) = 0.
double activate_derivative(Activation a, double u);
Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

struct NetSpec {
  int input_dim = 3;   // D
  int output_dim = 2;  // d
  int width = 64;      // M, hidden units per output
  Activation activation = Activation::Relu;
  std::optional<double> weight_std;  // defaults to 1/sqrt(D)
  double weight_bound = 10.0;        // C

  double resolved_std() const;
  void validate() const;
};

/// f^k(x) = (1/√M) Σ_{p in block k} σ(b_p · x), with B of shape (M d) x D and
/// a fixed averaging head that is never materialized.
class OneHiddenNet {
 public:
  OneHiddenNet(NetSpec spec, Eigen::MatrixXd B, std::uint64_t seed = 0);

  const NetSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& weights() const { return B_; }
  std::uint64_t seed() const { return seed_; }
  int width() const { return spec_.width; }
  int input_dim() const { return spec_.input_dim; }
  int output_dim() const { return spec_.output_dim; }
  int num_params() const { return static_cast<int>(B_.size()); }
  double max_abs_weight() const { return B_.cwiseAbs().maxCoeff(); }
  bool within_bound() const { return max_abs_weight() < spec_.weight_bound; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  /// Columns of X are inputs; returns d x n.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const;

  /// ∇_B f^k(x), shape (M d) x D; zero outside rows of block k.
  Eigen::MatrixXd weight_gradient(const Eigen::VectorXd& x, int k) const;
  /// d x P Jacobian w.r.t. the row-major flattening of B.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  /// Gradient of Σ_i <G_i, f(x_i)> w.r.t. the flattened weights.
  Eigen::VectorXd vjp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) const;

  /// Row-major flattening of B.
  Eigen::VectorXd params() const;
  OneHiddenNet with_params(const Eigen::VectorXd& p) const;
  OneHiddenNet with_weights(Eigen::MatrixXd B) const;

 private:
  NetSpec spec_;
  Eigen::MatrixXd B_;
  std::uint64_t seed_;
};

/// Entries i.i.d. N(0, std²); draws with |b| >= C are redrawn.
OneHiddenNet init_gaussian(const NetSpec& spec, std::uint64_t seed);

/// Copy with input columns latent_dim..D-1 set to zero.
OneHiddenNet make_invariant(const OneHiddenNet& net, int latent_dim);

enum class KernelStructure { DiagonalBlocks, Dense };

/// (n d) x (n d) matrix; entry (i d + k, j d + l) is K^{kl}_{ij}.
struct KernelMatrix {
  int n = 0;
  int d = 0;
  Eigen::MatrixXd data;
  KernelStructure structure = KernelStructure::Dense;

  Eigen::MatrixXd block(int i, int j) const;
  double min_eigenvalue() const;
  /// Largest |entry| off the diagonal of any d x d block.
  double max_off_diagonal_block_entry() const;
};

/// Analytic kernel: block k of K_ij is (x_i·x_j)/M Σ_{p in block k} σ'(b_p·x_i) σ'(b_p·x_j).
KernelMatrix kernel(const OneHiddenNet& net, const Eigen::MatrixXd& X);

/// Arccos limit (x_i·x_j)[1/2 - arccos(cos θ_ij)/(2π)] I_d for relu and
/// Gaussian weights. Throws std::domain_error for a zero input.
KernelMatrix kernel_infinite(const Eigen::MatrixXd& X, int output_dim);

struct DenseLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  bool has_bias = false;
  bool trainable = true;
  Activation activation = Activation::Identity;  // applied after the affine map
};

/// Fully connected network; parameters are the trainable layers' W (row-major)
/// followed by b when present, in layer order.
class GenericMLP {
 public:
  GenericMLP() = default;
  explicit GenericMLP(std::vector<DenseLayer> layers, std::uint64_t seed = 0);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::uint64_t seed() const { return seed_; }
  int input_dim() const { return static_cast<int>(layers_.front().W.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().W.rows()); }
  int num_params() const;
  std::vector<int> widths() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  Eigen::VectorXd vjp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) const;

  Eigen::VectorXd params() const;
  GenericMLP with_params(const Eigen::VectorXd& p) const;

  /// Depth-1 network whose head is the frozen averaging matrix.
  static GenericMLP from_one_hidden(const OneHiddenNet& net);

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t seed_ = 0;
};

/// widths = {D, h_1, ..., d}. Hidden layers use `activation`, the last layer
/// is linear. Weights N(0, 1/fan_in), biases zero.
GenericMLP init_mlp(const std::vector<int>& widths, Activation activation, std::uint64_t seed,
                    bool with_bias = true);

enum class InvariantInit { Random, Identity };

/// Network that ignores input coordinates latent_dim..D-1. Random mode zeroes
/// those first-layer columns of init_mlp; Identity mode lays out identity
/// blocks with linear activations so that f(x) = (x^1, ..., x^d). Throws
/// std::invalid_argument when a hidden width or the output is narrower than d.
GenericMLP init_invariant(const std::vector<int>& widths, int latent_dim, InvariantInit mode,
                          Activation activation, std::uint64_t seed);

/// Dense blocks J_i J_jᵀ from full parameter Jacobians.
KernelMatrix kernel_generic(const GenericMLP& net, const Eigen::MatrixXd& X);

inline constexpr int kLayoutVersion = 1;

nlohmann::json to_json(const OneHiddenNet& net);
nlohmann::json to_json(const GenericMLP& net);
OneHiddenNet one_hidden_from_json(const nlohmann::json& j);
GenericMLP mlp_from_json(const nlohmann::json& j);

/// Row-major CSV of the (n d) x (n d) matrix with header k_0,...
void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& K);

}  // namespace clr
