#include "clr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "clr/io.hpp"
#include "clr/rng.hpp"
#include "clr/variations.hpp"

namespace clr {

FlowMode parse_flow_mode(std::string_view name) {
  if (name == "vanilla") return FlowMode::Vanilla;
  if (name == "kernel-exact") return FlowMode::KernelExact;
  if (name == "weight-space") return FlowMode::WeightSpace;
  if (name == "clustered-approx") return FlowMode::ClusteredApprox;
  if (name == "infinite-width") return FlowMode::InfiniteWidth;
  throw std::invalid_argument("unknown flow mode '" + std::string(name) + "'");
}

std::string_view to_string(FlowMode mode) {
  switch (mode) {
    case FlowMode::Vanilla: return "vanilla";
    case FlowMode::KernelExact: return "kernel-exact";
    case FlowMode::WeightSpace: return "weight-space";
    case FlowMode::ClusteredApprox: return "clustered-approx";
    case FlowMode::InfiniteWidth: return "infinite-width";
  }
  return "?";
}

void FlowConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("FlowConfig: step must be positive");
  if (max_steps < 0) throw std::invalid_argument("FlowConfig: max_steps must be >= 0");
  if (record_stride < 1) throw std::invalid_argument("FlowConfig: record_stride must be >= 1");
  if (max_halvings < 0) throw std::invalid_argument("FlowConfig: max_halvings must be >= 0");
  if (invariance_samples < 0) throw std::invalid_argument("FlowConfig: invariance_samples must be >= 0");
}

DivergenceError::DivergenceError(int step, double loss)
    : std::runtime_error("loss diverged at step " + std::to_string(step) + " (loss = " +
                         std::to_string(loss) + ")"),
      step_(step),
      loss_(loss) {}

namespace {

void project_to_sphere(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double r = z.col(i).norm();
    if (r > 0.0) z.col(i) /= r;
  }
}

}  // namespace

LatentConfiguration step_vanilla(const LatentConfiguration& z, const SimilarityConfig& cfg,
                                 double step, bool sphere_projection) {
  const VariationReport g = invariant_gradient(z, cfg);
  LatentConfiguration out(z.points - step * g.euclidean, z.weights);
  if (sphere_projection) project_to_sphere(out.points);
  return out;
}

Eigen::MatrixXd kernel_increment(const LatentConfiguration& z, const KernelMatrix& K,
                                 const SimilarityConfig& cfg, double step) {
  if (K.n != z.size() || K.d != z.dim())
    throw std::invalid_argument("kernel_increment: kernel is for n=" + std::to_string(K.n) + ", d=" +
                                std::to_string(K.d) + " but the configuration has n=" +
                                std::to_string(z.size()) + ", d=" + std::to_string(z.dim()));
  if (K.data.rows() != K.n * K.d || K.data.cols() != K.n * K.d)
    throw std::invalid_argument("kernel_increment: kernel matrix must be (n d) x (n d)");
  const VariationReport g = invariant_gradient(z, cfg);
  // Column-major storage of the d x n gradient is exactly the point-major
  // (n d) vector the kernel acts on.
  const Eigen::Map<const Eigen::VectorXd> gv(g.euclidean.data(), g.euclidean.size());
  const Eigen::VectorXd inc = -(step / static_cast<double>(z.size())) * (K.data * gv);
  return Eigen::Map<const Eigen::MatrixXd>(inc.data(), z.dim(), z.size());
}

LatentConfiguration step_kernel(const LatentConfiguration& z, const KernelMatrix& K,
                                const SimilarityConfig& cfg, double step, bool sphere_projection) {
  LatentConfiguration out(z.points + kernel_increment(z, K, cfg, step), z.weights);
  if (sphere_projection) project_to_sphere(out.points);
  return out;
}

namespace {

ClusterFlowParams base_cluster_params(const ClusteredDataset& data) {
  ClusterFlowParams p;
  const int N = data.num_clusters();
  p.assignment = data.assignment;
  p.mass = Eigen::VectorXd::Zero(N);
  p.center_sq_norm.resize(N);
  p.representative.assign(static_cast<std::size_t>(N), -1);
  for (int i = 0; i < data.size(); ++i) {
    const int q = data.assignment[static_cast<std::size_t>(i)];
    p.mass(q) += 1.0;
    if (p.representative[static_cast<std::size_t>(q)] < 0) p.representative[static_cast<std::size_t>(q)] = i;
  }
  p.mass /= static_cast<double>(data.size());
  for (int q = 0; q < N; ++q) p.center_sq_norm(q) = data.centers.col(q).squaredNorm();
  return p;
}

}  // namespace

ClusterFlowParams cluster_params_from_net(const OneHiddenNet& net, const ClusteredDataset& data) {
  ClusterFlowParams p = base_cluster_params(data);
  const int M = net.width();
  const Eigen::MatrixXd pre = net.weights() * data.centers;
  for (int q = 0; q < data.num_clusters(); ++q) {
    Eigen::VectorXd beta(net.output_dim());
    for (int k = 0; k < net.output_dim(); ++k) {
      double s = 0.0;
      for (int r = k * M; r < (k + 1) * M; ++r) {
        const double ds = activate_derivative(net.spec().activation, pre(r, q));
        s += ds * ds;
      }
      beta(k) = s / static_cast<double>(M);
    }
    p.beta.push_back(beta);
  }
  return p;
}

ClusterFlowParams cluster_params_infinite(const ClusteredDataset& data, int output_dim) {
  ClusterFlowParams p = base_cluster_params(data);
  p.beta.assign(static_cast<std::size_t>(data.num_clusters()), Eigen::VectorXd::Constant(output_dim, 0.5));
  return p;
}

LatentConfiguration step_clustered(const LatentConfiguration& z, const ClusterFlowParams& params,
                                   const SimilarityConfig& cfg, double step, bool sphere_projection) {
  if (static_cast<int>(params.assignment.size()) != z.size())
    throw std::invalid_argument("step_clustered: assignment does not match the configuration");
  const VariationReport g = invariant_gradient(z, cfg);
  LatentConfiguration out = z;
  for (int i = 0; i < z.size(); ++i) {
    const int q = params.assignment[static_cast<std::size_t>(i)];
    if (q < 0 || q >= params.num_clusters())
      throw std::invalid_argument("step_clustered: unknown cluster index " + std::to_string(q));
    const int rep = params.representative[static_cast<std::size_t>(q)];
    const double scale = step * params.mass(q) * params.center_sq_norm(q);
    out.points.col(i) -= scale * params.beta[static_cast<std::size_t>(q)].cwiseProduct(g.euclidean.col(rep));
  }
  if (sphere_projection) project_to_sphere(out.points);
  return out;
}

double monitor_invariance(const Embedding& f, const ClusteredDataset& data,
                          const PerturbationSet& perturb, int samples, std::uint64_t seed) {
  if (perturb.mode == PerturbationMode::IdentityOnly || data.size() == 0) return 0.0;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = data.points.col(s % data.size());
    const Eigen::VectorXd tx = apply_perturbation(x, perturb, splitmix64(seed ^ static_cast<std::uint64_t>(s)));
    worst = std::max(worst, (f(tx) - f(x)).norm());
  }
  return worst;
}

double cluster_coherence(const Eigen::MatrixXd& z, const std::vector<int>& labels) {
  const int n = static_cast<int>(z.cols());
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("cluster_coherence: one label per point required");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw std::invalid_argument("cluster_coherence: needs at least two clusters");
  const int L = *distinct.rbegin() + 1;
  if (*distinct.begin() < 0) throw std::invalid_argument("cluster_coherence: negative label");

  const Eigen::MatrixXd dist = pairwise_sq_distances(z).cwiseSqrt();

  double total = 0.0;
  std::vector<double> sum(static_cast<std::size_t>(L));
  std::vector<int> count(static_cast<std::size_t>(L));
  for (int i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] += dist(i, j);
      ++count[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
    }
    const auto own = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    const double a = count[own] > 0 ? sum[own] / count[own] : 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (int q = 0; q < L; ++q) {
      const auto qq = static_cast<std::size_t>(q);
      if (qq != own && count[qq] > 0) b = std::min(b, sum[qq] / count[qq]);
    }
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

double uniformity_score(const Eigen::MatrixXd& z) {
  const int n = static_cast<int>(z.cols());
  const int d = static_cast<int>(z.rows());
  if (n < 2) throw std::invalid_argument("uniformity_score: needs at least two points");
  if (d != 2 && d != 3) throw std::invalid_argument("uniformity_score: defined on S^1 and S^2 only");
  const Eigen::MatrixXd u = normalize_columns(z);
  std::vector<double> theta;
  theta.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) theta.push_back(std::acos(std::clamp(u.col(i).dot(u.col(j)), -1.0, 1.0)));
  std::sort(theta.begin(), theta.end());
  const double m = static_cast<double>(theta.size());
  double ks = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double F = d == 2 ? theta[k] / std::numbers::pi : 0.5 * (1.0 - std::cos(theta[k]));
    ks = std::max({ks, static_cast<double>(k + 1) / m - F, F - static_cast<double>(k) / m});
  }
  return ks;
}

StepDiagnostics diagnose(const LatentConfiguration& z, const SimilarityConfig& cfg,
                         const std::vector<int>& labels, bool normalized_view) {
  StepDiagnostics d;
  SimilarityConfig c = cfg;
  LatentConfiguration view = z;
  if (normalized_view) {
    view.points = normalize_columns(z.points);
    c.constraint = Constraint::Sphere;
  }
  d.loss = generalized_loss(view, c);
  d.max_grad = invariant_gradient(view, c).max_tangential_norm;
  const std::set<int> distinct(labels.begin(), labels.end());
  d.coherence = (labels.size() == static_cast<std::size_t>(z.size()) && distinct.size() >= 2)
                    ? cluster_coherence(view.points, labels)
                    : std::numeric_limits<double>::quiet_NaN();
  d.uniformity = (z.dim() == 2 || z.dim() == 3) && z.size() >= 2
                     ? uniformity_score(view.points)
                     : std::numeric_limits<double>::quiet_NaN();
  return d;
}

Trajectory run_latent(const LatentConfiguration& z0, const SimilarityConfig& cfg,
                      const FlowConfig& flow, const std::vector<int>& labels,
                      const KernelMatrix* K, const ClusterFlowParams* params) {
  flow.validate();
  cfg.validate();
  switch (flow.mode) {
    case FlowMode::WeightSpace:
      throw std::invalid_argument("run_latent: weight-space mode needs a network (run_weight_space)");
    case FlowMode::KernelExact:
      if (!K) throw std::invalid_argument("run_latent: kernel-exact mode needs a kernel");
      break;
    case FlowMode::ClusteredApprox:
    case FlowMode::InfiniteWidth:
      if (!params) throw std::invalid_argument("run_latent: clustered modes need cluster parameters");
      break;
    case FlowMode::Vanilla: break;
  }

  Trajectory t;
  auto record = [&](int b, const LatentConfiguration& z) {
    t.times.push_back(b);
    t.states.push_back(z.points);
    t.diagnostics.push_back(diagnose(z, cfg, labels, flow.sphere_projection));
    const double loss = t.diagnostics.back().loss;
    if (!std::isfinite(loss) || loss > 1e6) throw DivergenceError(b, loss);
  };

  LatentConfiguration z = z0;
  record(0, z);
  for (int b = 1; b <= flow.max_steps; ++b) {
    switch (flow.mode) {
      case FlowMode::Vanilla: z = step_vanilla(z, cfg, flow.step, flow.sphere_projection); break;
      case FlowMode::KernelExact: z = step_kernel(z, *K, cfg, flow.step, flow.sphere_projection); break;
      default: z = step_clustered(z, *params, cfg, flow.step, flow.sphere_projection); break;
    }
    if (b % flow.record_stride == 0 || b == flow.max_steps) record(b, z);
  }
  return t;
}

double latent_loss_and_gradient(const Eigen::MatrixXd& Z, const SimilarityConfig& cfg,
                                bool normalized, Eigen::MatrixXd* dZ) {
  SimilarityConfig c = cfg;
  const double n = static_cast<double>(Z.cols());
  if (!normalized) {
    c.constraint = Constraint::Unconstrained;
    const LatentConfiguration z(Z);
    if (dZ) *dZ = invariant_gradient(z, c).euclidean / n;
    return generalized_loss(z, c);
  }
  c.constraint = Constraint::Sphere;
  const LatentConfiguration u(normalize_columns(Z));
  if (dZ) {
    const VariationReport g = invariant_gradient(u, c);
    dZ->resize(Z.rows(), Z.cols());
    for (Eigen::Index i = 0; i < Z.cols(); ++i) dZ->col(i) = g.tangential.col(i) / (n * Z.col(i).norm());
  }
  return generalized_loss(u, c);
}

namespace {

KernelMatrix net_kernel(const OneHiddenNet& net, const Eigen::MatrixXd& X) { return kernel(net, X); }
KernelMatrix net_kernel(const GenericMLP& net, const Eigen::MatrixXd& X) { return kernel_generic(net, X); }

}  // namespace

template <class Net>
WeightSpaceResult<Net> run_weight_space(const Net& net, const ClusteredDataset& data,
                                        const PerturbationSet& perturb,
                                        const SimilarityConfig& cfg, const FlowConfig& flow) {
  flow.validate();
  cfg.validate();
  if (flow.mode != FlowMode::WeightSpace && flow.mode != FlowMode::KernelExact)
    throw std::invalid_argument("run_weight_space: mode must be weight-space or kernel-exact");
  const Eigen::MatrixXd& X = data.points;
  const bool norm = flow.normalize_embedding;
  const bool kernel_mode = flow.mode == FlowMode::KernelExact;

  Net cur = net;
  Eigen::MatrixXd Z = cur.forward_batch(X);
  Eigen::MatrixXd dZ;
  double loss = latent_loss_and_gradient(Z, cfg, norm, &dZ);
  if (!std::isfinite(loss) || loss > 1e6) throw DivergenceError(0, loss);

  Trajectory t;
  auto record = [&](int b) {
    t.times.push_back(b);
    t.states.push_back(Z);
    StepDiagnostics d = diagnose(LatentConfiguration(Z), cfg, data.assignment, norm);
    const Embedding f = [&cur](const Eigen::VectorXd& x) { return Eigen::VectorXd(cur.forward(x)); };
    d.invariance_dev = monitor_invariance(f, data, perturb, flow.invariance_samples);
    t.diagnostics.push_back(d);
  };
  record(0);

  std::optional<KernelMatrix> frozen;
  if (kernel_mode && flow.frozen_kernel) frozen = net_kernel(cur, X);

  int completed = 0;
  for (int b = 1; b <= flow.max_steps; ++b) {
    const Eigen::VectorXd grad = cur.vjp(X, dZ);
    if (kernel_mode) {
      const KernelMatrix K = frozen ? *frozen : net_kernel(cur, X);
      const Eigen::Map<const Eigen::VectorXd> gv(dZ.data(), dZ.size());
      const Eigen::VectorXd inc = -flow.step * (K.data * gv);
      Z += Eigen::Map<const Eigen::MatrixXd>(inc.data(), Z.rows(), Z.cols());
      if (!frozen) cur = cur.with_params(cur.params() - flow.step * grad);
      loss = latent_loss_and_gradient(Z, cfg, norm, &dZ);
      if (!std::isfinite(loss) || loss > 1e6) throw DivergenceError(b, loss);
    } else {
      const Eigen::VectorXd p = cur.params();
      bool accepted = false;
      double h = flow.step;
      for (int attempt = 0; attempt <= flow.max_halvings; ++attempt, h *= 0.5) {
        Net cand = cur.with_params(p - h * grad);
        Eigen::MatrixXd Zc = cand.forward_batch(X);
        Eigen::MatrixXd dZc;
        const double lc = latent_loss_and_gradient(Zc, cfg, norm, &dZc);
        if (std::isfinite(lc) && lc <= loss) {
          cur = std::move(cand);
          Z = std::move(Zc);
          dZ = std::move(dZc);
          loss = lc;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        t.stalled = true;
        break;
      }
    }
    completed = b;
    if (b % flow.record_stride == 0 || b == flow.max_steps) record(b);
  }
  if (t.stalled && t.times.back() != completed) record(completed);
  return {std::move(t), std::move(cur)};
}

template WeightSpaceResult<OneHiddenNet> run_weight_space<OneHiddenNet>(
    const OneHiddenNet&, const ClusteredDataset&, const PerturbationSet&, const SimilarityConfig&,
    const FlowConfig&);
template WeightSpaceResult<GenericMLP> run_weight_space<GenericMLP>(
    const GenericMLP&, const ClusteredDataset&, const PerturbationSet&, const SimilarityConfig&,
    const FlowConfig&);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t) {
  auto out = io::open_for_write(path);
  out << "step,loss,max_grad,invariance_dev,coherence,uniformity\n";
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& d = t.diagnostics[r];
    out << t.times[r] << ',' << io::format_double(d.loss) << ',' << io::format_double(d.max_grad) << ','
        << io::format_double(d.invariance_dev) << ',' << io::format_double(d.coherence) << ','
        << io::format_double(d.uniformity) << '\n';
  }
}

void write_states_csv(const std::filesystem::path& path, const Trajectory& t) {
  auto out = io::open_for_write(path);
  const Eigen::Index d = t.states.empty() ? 0 : t.states.front().rows();
  out << "step,point";
  for (Eigen::Index k = 0; k < d; ++k) out << ",z_" << k;
  out << '\n';
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& z = t.states[r];
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
      out << t.times[r] << ',' << i;
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << io::format_double(z(k, i));
      out << '\n';
    }
  }
}

}  // namespace clr
