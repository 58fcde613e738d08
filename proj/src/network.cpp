#include "clr/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "clr/io.hpp"
#include "clr/rng.hpp"

namespace clr {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double activate(Activation a, double u) {
  switch (a) {
    case Activation::Relu: return u > 0.0 ? u : 0.0;
    case Activation::Tanh: return std::tanh(u);
    case Activation::SmoothRelu: return u > 30.0 ? u : std::log1p(std::exp(u));
    case Activation::Identity: return u;
  }
  return u;
}

double activate_derivative(Activation a, double u) {
  switch (a) {
    case Activation::Relu: return u > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case Activation::SmoothRelu: return 1.0 / (1.0 + std::exp(-u));
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "smooth_relu" || name == "smooth-relu") return Activation::SmoothRelu;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::SmoothRelu: return "smooth_relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

namespace {

Eigen::MatrixXd apply(Activation a, const Eigen::MatrixXd& U) {
  return U.unaryExpr([a](double u) { return activate(a, u); });
}

Eigen::MatrixXd apply_derivative(Activation a, const Eigen::MatrixXd& U) {
  return U.unaryExpr([a](double u) { return activate_derivative(a, u); });
}

Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& M) {
  const RowMajorMatrix R = M;
  return Eigen::Map<const Eigen::VectorXd>(R.data(), R.size());
}

Eigen::MatrixXd unflatten_row_major(const double* data, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RowMajorMatrix>(data, rows, cols);
}

}  // namespace

double NetSpec::resolved_std() const {
  return weight_std ? *weight_std : 1.0 / std::sqrt(static_cast<double>(input_dim));
}

void NetSpec::validate() const {
  if (input_dim < 1 || output_dim < 1 || width < 1)
    throw std::invalid_argument("NetSpec: dimensions and width must be positive");
  if (!(resolved_std() > 0.0)) throw std::invalid_argument("NetSpec: weight std must be positive");
  if (!(weight_bound > 0.0)) throw std::invalid_argument("NetSpec: weight bound must be positive");
}

OneHiddenNet::OneHiddenNet(NetSpec spec, Eigen::MatrixXd B, std::uint64_t seed)
    : spec_(std::move(spec)), B_(std::move(B)), seed_(seed) {
  spec_.validate();
  if (B_.rows() != static_cast<Eigen::Index>(spec_.width) * spec_.output_dim || B_.cols() != spec_.input_dim)
    throw std::invalid_argument("OneHiddenNet: B must be (M d) x D");
  if (!B_.allFinite()) throw std::invalid_argument("OneHiddenNet: non-finite weights");
}

Eigen::VectorXd OneHiddenNet::forward(const Eigen::VectorXd& x) const {
  return forward_batch(x);
}

Eigen::MatrixXd OneHiddenNet::forward_batch(const Eigen::MatrixXd& X) const {
  if (X.rows() != input_dim())
    throw std::invalid_argument("OneHiddenNet: input has " + std::to_string(X.rows()) +
                                " coordinates, expected " + std::to_string(input_dim()));
  const Eigen::MatrixXd H = apply(spec_.activation, B_ * X);
  const int M = width();
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  Eigen::MatrixXd out(output_dim(), X.cols());
  for (int k = 0; k < output_dim(); ++k)
    out.row(k) = H.middleRows(static_cast<Eigen::Index>(k) * M, M).colwise().sum() * scale;
  return out;
}

Eigen::MatrixXd OneHiddenNet::weight_gradient(const Eigen::VectorXd& x, int k) const {
  if (x.size() != input_dim()) throw std::invalid_argument("weight_gradient: dimension mismatch");
  if (k < 0 || k >= output_dim()) throw std::invalid_argument("weight_gradient: output index out of range");
  const int M = width();
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(B_.rows(), B_.cols());
  for (int p = k * M; p < (k + 1) * M; ++p)
    g.row(p) = scale * activate_derivative(spec_.activation, B_.row(p).dot(x)) * x.transpose();
  return g;
}

Eigen::MatrixXd OneHiddenNet::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J(output_dim(), num_params());
  for (int k = 0; k < output_dim(); ++k) J.row(k) = flatten_row_major(weight_gradient(x, k)).transpose();
  return J;
}

Eigen::VectorXd OneHiddenNet::vjp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) const {
  if (X.rows() != input_dim() || G.rows() != output_dim() || G.cols() != X.cols())
    throw std::invalid_argument("OneHiddenNet::vjp: dimension mismatch");
  const int M = width();
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  Eigen::MatrixXd S = apply_derivative(spec_.activation, B_ * X);
  for (int k = 0; k < output_dim(); ++k)
    for (Eigen::Index i = 0; i < X.cols(); ++i)
      S.block(static_cast<Eigen::Index>(k) * M, i, M, 1) *= G(k, i) * scale;
  return flatten_row_major(S * X.transpose());
}

Eigen::VectorXd OneHiddenNet::params() const { return flatten_row_major(B_); }

OneHiddenNet OneHiddenNet::with_params(const Eigen::VectorXd& p) const {
  if (p.size() != num_params()) throw std::invalid_argument("OneHiddenNet::with_params: wrong parameter count");
  return with_weights(unflatten_row_major(p.data(), B_.rows(), B_.cols()));
}

OneHiddenNet OneHiddenNet::with_weights(Eigen::MatrixXd B) const {
  return OneHiddenNet(spec_, std::move(B), seed_);
}

OneHiddenNet init_gaussian(const NetSpec& spec, std::uint64_t seed) {
  spec.validate();
  const double sd = spec.resolved_std();
  CounterRng rng(seed, /*stream=*/4);
  Eigen::MatrixXd B(static_cast<Eigen::Index>(spec.width) * spec.output_dim, spec.input_dim);
  for (Eigen::Index r = 0; r < B.rows(); ++r) {
    for (Eigen::Index c = 0; c < B.cols(); ++c) {
      double v = sd * rng.normal();
      while (std::abs(v) >= spec.weight_bound) v = sd * rng.normal();
      B(r, c) = v;
    }
  }
  return OneHiddenNet(spec, std::move(B), seed);
}

OneHiddenNet make_invariant(const OneHiddenNet& net, int latent_dim) {
  if (latent_dim < 1 || latent_dim > net.input_dim())
    throw std::invalid_argument("make_invariant: latent_dim out of range");
  Eigen::MatrixXd B = net.weights();
  B.rightCols(net.input_dim() - latent_dim).setZero();
  return net.with_weights(std::move(B));
}

Eigen::MatrixXd KernelMatrix::block(int i, int j) const {
  return data.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d);
}

double KernelMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(data, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double KernelMatrix::max_off_diagonal_block_entry() const {
  double m = 0.0;
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      if (r % d != c % d) m = std::max(m, std::abs(data(r, c)));
  return m;
}

KernelMatrix kernel(const OneHiddenNet& net, const Eigen::MatrixXd& X) {
  if (X.rows() != net.input_dim()) throw std::invalid_argument("kernel: dimension mismatch");
  const int n = static_cast<int>(X.cols());
  const int d = net.output_dim();
  const int M = net.width();
  const Eigen::MatrixXd S = apply_derivative(net.spec().activation, net.weights() * X);
  const Eigen::MatrixXd gram = X.transpose() * X;

  KernelMatrix K;
  K.n = n;
  K.d = d;
  K.structure = KernelStructure::DiagonalBlocks;
  K.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * d, static_cast<Eigen::Index>(n) * d);
  for (int k = 0; k < d; ++k) {
    const auto Sk = S.middleRows(static_cast<Eigen::Index>(k) * M, M);
    const Eigen::MatrixXd Kk = gram.cwiseProduct(Sk.transpose() * Sk) / static_cast<double>(M);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K.data(static_cast<Eigen::Index>(i) * d + k, static_cast<Eigen::Index>(j) * d + k) = Kk(i, j);
  }
  return K;
}

KernelMatrix kernel_infinite(const Eigen::MatrixXd& X, int output_dim) {
  if (output_dim < 1) throw std::invalid_argument("kernel_infinite: output_dim must be positive");
  const int n = static_cast<int>(X.cols());
  Eigen::VectorXd norms(n);
  for (int i = 0; i < n; ++i) {
    norms(i) = X.col(i).norm();
    if (!(norms(i) > 0.0)) throw std::domain_error("kernel_infinite: input " + std::to_string(i) + " is the zero vector");
  }
  KernelMatrix K;
  K.n = n;
  K.d = output_dim;
  K.structure = KernelStructure::DiagonalBlocks;
  K.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * output_dim, static_cast<Eigen::Index>(n) * output_dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double ip = X.col(i).dot(X.col(j));
      const double c = std::clamp(ip / (norms(i) * norms(j)), -1.0, 1.0);
      const double v = ip * (0.5 - std::acos(c) / (2.0 * std::numbers::pi));
      for (int k = 0; k < output_dim; ++k)
        K.data(static_cast<Eigen::Index>(i) * output_dim + k, static_cast<Eigen::Index>(j) * output_dim + k) = v;
    }
  }
  return K;
}

GenericMLP::GenericMLP(std::vector<DenseLayer> layers, std::uint64_t seed)
    : layers_(std::move(layers)), seed_(seed) {
  if (layers_.empty()) throw std::invalid_argument("GenericMLP: needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    if (l > 0 && L.W.cols() != layers_[l - 1].W.rows())
      throw std::invalid_argument("GenericMLP: layer " + std::to_string(l) + " input width mismatch");
    if (L.has_bias && L.b.size() != L.W.rows())
      throw std::invalid_argument("GenericMLP: layer " + std::to_string(l) + " bias size mismatch");
    if (!L.W.allFinite() || (L.has_bias && !L.b.allFinite()))
      throw std::invalid_argument("GenericMLP: non-finite parameters");
  }
}

int GenericMLP::num_params() const {
  int p = 0;
  for (const auto& L : layers_)
    if (L.trainable) p += static_cast<int>(L.W.size() + (L.has_bias ? L.b.size() : 0));
  return p;
}

std::vector<int> GenericMLP::widths() const {
  std::vector<int> w{input_dim()};
  for (const auto& L : layers_) w.push_back(static_cast<int>(L.W.rows()));
  return w;
}

Eigen::VectorXd GenericMLP::forward(const Eigen::VectorXd& x) const { return forward_batch(x); }

Eigen::MatrixXd GenericMLP::forward_batch(const Eigen::MatrixXd& X) const {
  if (X.rows() != input_dim()) throw std::invalid_argument("GenericMLP: input dimension mismatch");
  Eigen::MatrixXd a = X;
  for (const auto& L : layers_) {
    Eigen::MatrixXd u = L.W * a;
    if (L.has_bias) u.colwise() += L.b;
    a = apply(L.activation, u);
  }
  return a;
}

Eigen::VectorXd GenericMLP::vjp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) const {
  if (X.rows() != input_dim() || G.rows() != output_dim() || G.cols() != X.cols())
    throw std::invalid_argument("GenericMLP::vjp: dimension mismatch");
  std::vector<Eigen::MatrixXd> inputs, pre;
  Eigen::MatrixXd a = X;
  for (const auto& L : layers_) {
    inputs.push_back(a);
    Eigen::MatrixXd u = L.W * a;
    if (L.has_bias) u.colwise() += L.b;
    pre.push_back(u);
    a = apply(L.activation, u);
  }
  std::vector<Eigen::VectorXd> grads(layers_.size());
  Eigen::MatrixXd delta = G;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    const Eigen::MatrixXd du = delta.cwiseProduct(apply_derivative(L.activation, pre[l]));
    if (L.trainable) {
      const Eigen::VectorXd gW = flatten_row_major(du * inputs[l].transpose());
      if (L.has_bias) {
        Eigen::VectorXd g(gW.size() + L.b.size());
        g << gW, du.rowwise().sum();
        grads[l] = g;
      } else {
        grads[l] = gW;
      }
    }
    if (l > 0) delta = L.W.transpose() * du;
  }
  Eigen::VectorXd out(num_params());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (!layers_[l].trainable) continue;
    out.segment(off, grads[l].size()) = grads[l];
    off += grads[l].size();
  }
  return out;
}

Eigen::MatrixXd GenericMLP::jacobian(const Eigen::VectorXd& x) const {
  const int d = output_dim();
  Eigen::MatrixXd J(d, num_params());
  for (int k = 0; k < d; ++k) J.row(k) = vjp(x, Eigen::VectorXd::Unit(d, k)).transpose();
  return J;
}

Eigen::VectorXd GenericMLP::params() const {
  Eigen::VectorXd out(num_params());
  Eigen::Index off = 0;
  for (const auto& L : layers_) {
    if (!L.trainable) continue;
    out.segment(off, L.W.size()) = flatten_row_major(L.W);
    off += L.W.size();
    if (L.has_bias) {
      out.segment(off, L.b.size()) = L.b;
      off += L.b.size();
    }
  }
  return out;
}

GenericMLP GenericMLP::with_params(const Eigen::VectorXd& p) const {
  if (p.size() != num_params()) throw std::invalid_argument("GenericMLP::with_params: wrong parameter count");
  std::vector<DenseLayer> layers = layers_;
  Eigen::Index off = 0;
  for (auto& L : layers) {
    if (!L.trainable) continue;
    L.W = unflatten_row_major(p.data() + off, L.W.rows(), L.W.cols());
    off += L.W.size();
    if (L.has_bias) {
      L.b = p.segment(off, L.b.size());
      off += L.b.size();
    }
  }
  return GenericMLP(std::move(layers), seed_);
}

GenericMLP GenericMLP::from_one_hidden(const OneHiddenNet& net) {
  const int M = net.width();
  const int d = net.output_dim();
  DenseLayer hidden;
  hidden.W = net.weights();
  hidden.activation = net.spec().activation;
  DenseLayer head;
  head.W = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(M) * d);
  for (int k = 0; k < d; ++k)
    head.W.block(k, static_cast<Eigen::Index>(k) * M, 1, M).setConstant(1.0 / std::sqrt(static_cast<double>(M)));
  head.trainable = false;
  return GenericMLP({hidden, head}, net.seed());
}

GenericMLP init_mlp(const std::vector<int>& widths, Activation activation, std::uint64_t seed,
                    bool with_bias) {
  if (widths.size() < 2) throw std::invalid_argument("init_mlp: need input and output widths");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("init_mlp: widths must be positive");
  CounterRng rng(seed, /*stream=*/5);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    DenseLayer L;
    const double sd = 1.0 / std::sqrt(static_cast<double>(widths[l - 1]));
    L.W.resize(widths[l], widths[l - 1]);
    for (Eigen::Index r = 0; r < L.W.rows(); ++r)
      for (Eigen::Index c = 0; c < L.W.cols(); ++c) L.W(r, c) = sd * rng.normal();
    L.has_bias = with_bias;
    if (with_bias) L.b = Eigen::VectorXd::Zero(widths[l]);
    L.activation = (l + 1 == widths.size()) ? Activation::Identity : activation;
    layers.push_back(std::move(L));
  }
  return GenericMLP(std::move(layers), seed);
}

GenericMLP init_invariant(const std::vector<int>& widths, int latent_dim, InvariantInit mode,
                          Activation activation, std::uint64_t seed) {
  if (widths.size() < 2) throw std::invalid_argument("init_invariant: need input and output widths");
  if (latent_dim < 1 || latent_dim > widths.front())
    throw std::invalid_argument("init_invariant: latent_dim out of range");
  if (mode == InvariantInit::Random) {
    GenericMLP net = init_mlp(widths, activation, seed);
    std::vector<DenseLayer> layers = net.layers();
    layers.front().W.rightCols(widths.front() - latent_dim).setZero();
    return GenericMLP(std::move(layers), seed);
  }
  for (std::size_t l = 1; l < widths.size(); ++l)
    if (widths[l] < latent_dim)
      throw std::invalid_argument("init_invariant: layer " + std::to_string(l) + " is narrower than d");
  if (widths.back() != latent_dim)
    throw std::invalid_argument("init_invariant: identity layout needs output width d");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    DenseLayer L;
    L.W = Eigen::MatrixXd::Zero(widths[l], widths[l - 1]);
    for (int r = 0; r < latent_dim; ++r) L.W(r, r) = 1.0;
    L.activation = Activation::Identity;
    layers.push_back(std::move(L));
  }
  return GenericMLP(std::move(layers), seed);
}

KernelMatrix kernel_generic(const GenericMLP& net, const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.cols());
  const int d = net.output_dim();
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n) * d, net.num_params());
  for (int i = 0; i < n; ++i) J.middleRows(static_cast<Eigen::Index>(i) * d, d) = net.jacobian(X.col(i));
  KernelMatrix K;
  K.n = n;
  K.d = d;
  K.structure = KernelStructure::Dense;
  K.data = J * J.transpose();
  return K;
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void require_layout(const nlohmann::json& j, std::string_view arch) {
  if (j.at("layout_version").get<int>() != kLayoutVersion)
    throw std::runtime_error("network JSON: unsupported layout_version");
  if (j.at("arch").get<std::string>() != arch)
    throw std::runtime_error("network JSON: expected arch '" + std::string(arch) + "'");
}

}  // namespace

nlohmann::json to_json(const OneHiddenNet& net) {
  const auto& s = net.spec();
  return {{"arch", "one_hidden"},
          {"widths", {s.input_dim, s.width * s.output_dim, s.output_dim}},
          {"width_per_output", s.width},
          {"activation", std::string(to_string(s.activation))},
          {"weight_std", s.resolved_std()},
          {"weight_bound", s.weight_bound},
          {"seed", net.seed()},
          {"weights", to_vector(net.params())},
          {"layout_version", kLayoutVersion}};
}

OneHiddenNet one_hidden_from_json(const nlohmann::json& j) {
  require_layout(j, "one_hidden");
  NetSpec s;
  const auto widths = j.at("widths").get<std::vector<int>>();
  if (widths.size() != 3) throw std::runtime_error("network JSON: one_hidden needs three widths");
  s.input_dim = widths[0];
  s.output_dim = widths[2];
  s.width = j.at("width_per_output").get<int>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  s.weight_std = j.at("weight_std").get<double>();
  s.weight_bound = j.at("weight_bound").get<double>();
  const auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<long>(w.size()) != static_cast<long>(s.width) * s.output_dim * s.input_dim)
    throw std::runtime_error("network JSON: weight count does not match widths");
  return OneHiddenNet(s, unflatten_row_major(w.data(), static_cast<Eigen::Index>(s.width) * s.output_dim, s.input_dim),
                      j.at("seed").get<std::uint64_t>());
}

nlohmann::json to_json(const GenericMLP& net) {
  std::vector<std::string> acts;
  std::vector<bool> bias, trainable;
  std::vector<double> weights;
  for (const auto& L : net.layers()) {
    acts.emplace_back(to_string(L.activation));
    bias.push_back(L.has_bias);
    trainable.push_back(L.trainable);
    const auto w = to_vector(flatten_row_major(L.W));
    weights.insert(weights.end(), w.begin(), w.end());
    if (L.has_bias) weights.insert(weights.end(), L.b.data(), L.b.data() + L.b.size());
  }
  return {{"arch", "mlp"},          {"widths", net.widths()},       {"activation", acts},
          {"has_bias", bias},        {"trainable", trainable},       {"seed", net.seed()},
          {"weights", weights},      {"layout_version", kLayoutVersion}};
}

GenericMLP mlp_from_json(const nlohmann::json& j) {
  require_layout(j, "mlp");
  const auto widths = j.at("widths").get<std::vector<int>>();
  const auto acts = j.at("activation").get<std::vector<std::string>>();
  const auto bias = j.at("has_bias").get<std::vector<bool>>();
  const auto trainable = j.at("trainable").get<std::vector<bool>>();
  const auto w = j.at("weights").get<std::vector<double>>();
  const std::size_t nl = widths.size() - 1;
  if (widths.size() < 2 || acts.size() != nl || bias.size() != nl || trainable.size() != nl)
    throw std::runtime_error("network JSON: per-layer lists do not match widths");
  std::vector<DenseLayer> layers;
  std::size_t off = 0;
  for (std::size_t l = 0; l < nl; ++l) {
    DenseLayer L;
    const std::size_t rows = static_cast<std::size_t>(widths[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(widths[l]);
    const std::size_t need = rows * cols + (bias[l] ? rows : 0);
    if (off + need > w.size()) throw std::runtime_error("network JSON: too few weights");
    L.W = unflatten_row_major(w.data() + off, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    off += rows * cols;
    L.has_bias = bias[l];
    if (L.has_bias) {
      L.b = Eigen::Map<const Eigen::VectorXd>(w.data() + off, static_cast<Eigen::Index>(rows));
      off += rows;
    }
    L.trainable = trainable[l];
    L.activation = parse_activation(acts[l]);
    layers.push_back(std::move(L));
  }
  if (off != w.size()) throw std::runtime_error("network JSON: too many weights");
  return GenericMLP(std::move(layers), j.at("seed").get<std::uint64_t>());
}

void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& K) {
  auto out = io::open_for_write(path);
  for (Eigen::Index c = 0; c < K.data.cols(); ++c) out << (c ? "," : "") << "k_" << c;
  out << '\n';
  for (Eigen::Index r = 0; r < K.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < K.data.cols(); ++c) out << (c ? "," : "") << io::format_double(K.data(r, c));
    out << '\n';
  }
}

}  // namespace clr
