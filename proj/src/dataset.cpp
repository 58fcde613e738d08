#include "clr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "clr/io.hpp"
#include "clr/rng.hpp"

namespace clr {

void ClusterSpec::validate() const {
  if (ambient_dim < 1 || latent_dim < 1 || num_clusters < 1)
    throw std::invalid_argument("ClusterSpec: dimensions and cluster count must be positive");
  if (latent_dim > ambient_dim)
    throw std::invalid_argument("ClusterSpec: latent_dim d=" + std::to_string(latent_dim) +
                                " exceeds ambient_dim D=" + std::to_string(ambient_dim));
  if (num_clusters > latent_dim)
    throw std::invalid_argument("ClusterSpec: cannot place N=" + std::to_string(num_clusters) +
                                " orthogonal centers in d=" + std::to_string(latent_dim) +
                                " dimensions");
  if (static_cast<int>(cluster_sizes.size()) != num_clusters ||
      static_cast<int>(center_norms.size()) != num_clusters)
    throw std::invalid_argument("ClusterSpec: need one size and one center norm per cluster");
  for (int s : cluster_sizes)
    if (s < 1) throw std::invalid_argument("ClusterSpec: every cluster needs at least one point");
  for (double r : center_norms)
    if (!(r > 0.0)) throw std::invalid_argument("ClusterSpec: center norms must be positive");
  if (!(noise_bound >= 0.0)) throw std::invalid_argument("ClusterSpec: noise bound must be >= 0");
}

int ClusterSpec::num_points() const {
  return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0);
}

std::vector<int> ClusteredDataset::cluster_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(num_clusters()), 0);
  for (int q : assignment) ++sizes[static_cast<std::size_t>(q)];
  return sizes;
}

double ClusteredDataset::max_noise_norm() const {
  double m = 0.0;
  for (int i = 0; i < size(); ++i)
    m = std::max(m, (points.col(i) - centers.col(assignment[static_cast<std::size_t>(i)])).norm());
  return m;
}

ClusteredDataset generate(const ClusterSpec& spec) {
  spec.validate();
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(spec.ambient_dim, spec.num_clusters);
  for (int q = 0; q < spec.num_clusters; ++q) centers(q, q) = spec.center_norms[static_cast<std::size_t>(q)];
  return generate_from_centers(centers, spec.latent_dim, spec.cluster_sizes, spec.noise_bound,
                               spec.seed, spec.split);
}

ClusteredDataset generate_from_centers(const Eigen::MatrixXd& centers, int latent_dim,
                                       const std::vector<int>& cluster_sizes,
                                       double noise_bound, std::uint64_t seed,
                                       NoiseSplit split) {
  const int D = static_cast<int>(centers.rows());
  const int N = static_cast<int>(centers.cols());
  if (latent_dim < 1 || latent_dim > D)
    throw std::invalid_argument("generate_from_centers: latent_dim out of range");
  if (static_cast<int>(cluster_sizes.size()) != N)
    throw std::invalid_argument("generate_from_centers: one size per center required");
  if (!(noise_bound >= 0.0)) throw std::invalid_argument("generate_from_centers: negative noise bound");
  if (D > latent_dim && centers.bottomRows(D - latent_dim).cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("generate_from_centers: centers must lie in the first d coordinates");

  const int n = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0);
  ClusteredDataset out;
  out.centers = centers;
  out.points.resize(D, n);
  out.noise.resize(D, n);
  out.assignment.reserve(static_cast<std::size_t>(n));
  out.latent_dim = latent_dim;
  out.noise_bound = noise_bound;

  const int orth_dim = D - latent_dim;
  double r_manifold = 0.0, r_orth = 0.0;
  switch (split) {
    case NoiseSplit::Split: r_manifold = r_orth = 0.5 * noise_bound; break;
    case NoiseSplit::OrthogonalOnly: r_orth = noise_bound; break;
    case NoiseSplit::ManifoldOnly: r_manifold = noise_bound; break;
  }

  CounterRng rng(seed, /*stream=*/1);
  int i = 0;
  for (int q = 0; q < N; ++q) {
    if (cluster_sizes[static_cast<std::size_t>(q)] < 1)
      throw std::invalid_argument("generate_from_centers: every cluster needs at least one point");
    for (int k = 0; k < cluster_sizes[static_cast<std::size_t>(q)]; ++k, ++i) {
      Eigen::VectorXd eps = Eigen::VectorXd::Zero(D);
      eps.head(latent_dim) = rng.uniform_in_ball(latent_dim, r_manifold);
      if (orth_dim > 0) eps.tail(orth_dim) = rng.uniform_in_ball(orth_dim, r_orth);
      out.noise.col(i) = eps;
      out.points.col(i) = centers.col(q) + eps;
      out.assignment.push_back(q);
    }
  }
  if (noise_bound > 0.0 && out.max_noise_norm() >= noise_bound)
    throw std::logic_error("generate_from_centers: noise bound violated");
  return out;
}

PerturbationSet PerturbationSet::identity() { return {}; }

PerturbationSet PerturbationSet::orthogonal_noise(int latent_dim, double magnitude) {
  if (latent_dim < 0 || !(magnitude >= 0.0))
    throw std::invalid_argument("orthogonal_noise: bad latent dim or magnitude");
  PerturbationSet p;
  p.mode = PerturbationMode::OrthogonalNoise;
  p.latent_dim = latent_dim;
  p.magnitude = magnitude;
  return p;
}

PerturbationSet PerturbationSet::finite_list(int latent_dim, std::vector<Eigen::VectorXd> draws) {
  if (draws.empty()) throw std::invalid_argument("finite_list: need at least one displacement");
  for (const auto& v : draws) {
    if (v.size() < latent_dim) throw std::invalid_argument("finite_list: displacement too short");
    if (latent_dim > 0 && v.head(latent_dim).cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("finite_list: displacements must vanish on the manifold coordinates");
  }
  PerturbationSet p;
  p.mode = PerturbationMode::FiniteList;
  p.latent_dim = latent_dim;
  p.draws = std::move(draws);
  for (const auto& v : p.draws) p.magnitude = std::max(p.magnitude, v.norm());
  return p;
}

int PerturbationSet::atoms() const {
  switch (mode) {
    case PerturbationMode::IdentityOnly: return 1;
    case PerturbationMode::FiniteList: return static_cast<int>(draws.size());
    case PerturbationMode::OrthogonalNoise: break;
  }
  throw std::invalid_argument("PerturbationSet: orthogonal-noise mode has no finite atoms");
}

Eigen::VectorXd apply_perturbation(const Eigen::VectorXd& x, const PerturbationSet& p,
                                   std::uint64_t seed) {
  switch (p.mode) {
    case PerturbationMode::IdentityOnly: return x;
    case PerturbationMode::FiniteList:
      return apply_atom(x, p, static_cast<int>(seed % p.draws.size()));
    case PerturbationMode::OrthogonalNoise: {
      Eigen::VectorXd out = x;
      const Eigen::Index orth = x.size() - p.latent_dim;
      if (orth > 0) {
        CounterRng rng(seed, /*stream=*/2);
        out.tail(orth) += rng.uniform_in_ball(orth, p.magnitude);
      }
      return out;
    }
  }
  return x;
}

Eigen::VectorXd apply_atom(const Eigen::VectorXd& x, const PerturbationSet& p, int k) {
  if (p.mode == PerturbationMode::IdentityOnly) return x;
  if (p.mode != PerturbationMode::FiniteList)
    throw std::invalid_argument("apply_atom: perturbation set is not finite");
  const auto& v = p.draws.at(static_cast<std::size_t>(k));
  if (v.size() != x.size()) throw std::invalid_argument("apply_atom: dimension mismatch");
  return x + v;
}

void write_dataset_csv(const std::filesystem::path& path, const ClusteredDataset& data) {
  auto out = io::open_for_write(path);
  out << "idx,cluster";
  for (int k = 0; k < data.ambient_dim(); ++k) out << ",x_" << k;
  out << '\n';
  for (int i = 0; i < data.size(); ++i) {
    out << i << ',' << data.assignment[static_cast<std::size_t>(i)];
    for (int k = 0; k < data.ambient_dim(); ++k) out << ',' << io::format_double(data.points(k, i));
    out << '\n';
  }
}

ClusteredDataset read_dataset_csv(const std::filesystem::path& path, int latent_dim) {
  const auto table = io::read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "idx" || table.header[1] != "cluster")
    throw std::runtime_error(path.string() + ": expected header idx,cluster,x_0,...");
  const int D = static_cast<int>(table.header.size()) - 2;
  const int n = static_cast<int>(table.rows.size());
  if (latent_dim < 1 || latent_dim > D) throw std::invalid_argument("read_dataset_csv: bad latent_dim");

  ClusteredDataset out;
  out.latent_dim = latent_dim;
  out.points.resize(D, n);
  out.assignment.assign(static_cast<std::size_t>(n), 0);
  int num_clusters = 0;
  for (const auto& row : table.rows) {
    const double idx = row[0];
    if (idx < 0 || idx >= n || idx != static_cast<int>(idx))
      throw std::runtime_error(path.string() + ": bad point index");
    const int i = static_cast<int>(idx);
    const int q = static_cast<int>(row[1]);
    if (q < 0 || q != row[1]) throw std::runtime_error(path.string() + ": bad cluster index");
    out.assignment[static_cast<std::size_t>(i)] = q;
    num_clusters = std::max(num_clusters, q + 1);
    for (int k = 0; k < D; ++k) out.points(k, i) = row[static_cast<std::size_t>(k) + 2];
  }
  out.centers = Eigen::MatrixXd::Zero(D, num_clusters);
  std::vector<int> counts(static_cast<std::size_t>(num_clusters), 0);
  for (int i = 0; i < n; ++i) {
    const int q = out.assignment[static_cast<std::size_t>(i)];
    out.centers.col(q) += out.points.col(i);
    ++counts[static_cast<std::size_t>(q)];
  }
  for (int q = 0; q < num_clusters; ++q)
    if (counts[static_cast<std::size_t>(q)] > 0) out.centers.col(q) /= counts[static_cast<std::size_t>(q)];
  out.noise.resize(D, n);
  for (int i = 0; i < n; ++i) out.noise.col(i) = out.points.col(i) - out.centers.col(out.assignment[static_cast<std::size_t>(i)]);
  out.noise_bound = std::nextafter(out.max_noise_norm(), std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace clr
