#include "clr/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "clr/rng.hpp"

namespace clr {

double SimilarityConfig::psi_value(double t) const {
  switch (psi) {
    case PsiKind::Log1p: return std::log1p(t);
    case PsiKind::Log1pHalf: return std::log1p(0.5 * t);
    case PsiKind::Identity: return t;
  }
  return t;
}

double SimilarityConfig::psi_first(double t) const {
  switch (psi) {
    case PsiKind::Log1p: return 1.0 / (1.0 + t);
    case PsiKind::Log1pHalf: return 1.0 / (2.0 + t);
    case PsiKind::Identity: return 1.0;
  }
  return 1.0;
}

double SimilarityConfig::psi_second(double t) const {
  switch (psi) {
    case PsiKind::Log1p: return -1.0 / ((1.0 + t) * (1.0 + t));
    case PsiKind::Log1pHalf: return -1.0 / ((2.0 + t) * (2.0 + t));
    case PsiKind::Identity: return 0.0;
  }
  return 0.0;
}

double SimilarityConfig::eta_value(double t) const {
  if (custom_eta) return custom_eta->value(t);
  return std::exp(-t / tau);
}

double SimilarityConfig::eta_first(double t) const {
  if (custom_eta) return custom_eta->first(t);
  return -std::exp(-t / tau) / tau;
}

double SimilarityConfig::eta_second(double t) const {
  if (custom_eta) return custom_eta->second(t);
  return std::exp(-t / tau) / (tau * tau);
}

void SimilarityConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("SimilarityConfig: tau must be positive and finite");
  if (custom_eta && (!custom_eta->value || !custom_eta->first || !custom_eta->second))
    throw std::invalid_argument("SimilarityConfig: custom eta needs value, first and second derivative");
}

PsiKind parse_psi(std::string_view name) {
  if (name == "log1p") return PsiKind::Log1p;
  if (name == "log1p_half") return PsiKind::Log1pHalf;
  if (name == "identity") return PsiKind::Identity;
  throw std::invalid_argument("unknown psi '" + std::string(name) + "'");
}

std::string_view to_string(PsiKind kind) {
  switch (kind) {
    case PsiKind::Log1p: return "log1p";
    case PsiKind::Log1pHalf: return "log1p_half";
    case PsiKind::Identity: return "identity";
  }
  return "?";
}

LatentConfiguration::LatentConfiguration(Eigen::MatrixXd pts)
    : points(std::move(pts)),
      weights(Eigen::VectorXd::Constant(points.cols(), points.cols() > 0 ? 1.0 / static_cast<double>(points.cols()) : 0.0)) {}

LatentConfiguration::LatentConfiguration(Eigen::MatrixXd pts, Eigen::VectorXd w)
    : points(std::move(pts)), weights(std::move(w)) {
  if (weights.size() != points.cols())
    throw std::invalid_argument("LatentConfiguration: one weight per point required");
}

void LatentConfiguration::validate(Constraint constraint) const {
  if (weights.size() != points.cols())
    throw std::invalid_argument("LatentConfiguration: one weight per point required");
  if (size() == 0) throw std::invalid_argument("LatentConfiguration: empty configuration");
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("LatentConfiguration: weights must be a probability vector");
  if (!points.allFinite()) throw std::invalid_argument("LatentConfiguration: non-finite point");
  if (constraint == Constraint::Sphere) {
    for (int i = 0; i < size(); ++i)
      if (std::abs(points.col(i).norm() - 1.0) > 1e-9)
        throw std::invalid_argument("LatentConfiguration: point " + std::to_string(i) +
                                    " is off the unit sphere");
  }
}

Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double r = z.col(i).norm();
    if (!(r > 0.0)) throw std::domain_error("zero embedding at point " + std::to_string(i));
    out.col(i) = z.col(i) / r;
  }
  return out;
}

Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.cols(), d = z.rows();
  Eigen::MatrixXd D2(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    D2(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double t = z(k, i) - z(k, j);
        s += t * t;
      }
      D2(i, j) = s;
      D2(j, i) = s;
    }
  }
  return D2;
}

Eigen::VectorXd similarity_mass(const LatentConfiguration& z, const SimilarityConfig& cfg) {
  const int n = z.size();
  const double eta0 = cfg.eta_value(0.0);
  if (eta0 == 0.0) throw std::invalid_argument("similarity profile has eta(0) = 0");
  const Eigen::MatrixXd D2 = pairwise_sq_distances(z.points);
  Eigen::VectorXd G(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += z.weights(j) * cfg.eta_value(0.5 * D2(i, j));
    G(i) = s / eta0;
  }
  return G;
}

double generalized_loss(const LatentConfiguration& z, const SimilarityConfig& cfg) {
  const Eigen::VectorXd G = similarity_mass(z, cfg);
  // Neumaier summation keeps the outer sum insensitive to point order.
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i < z.size(); ++i) {
    const double term = z.weights(i) * cfg.psi_value(G(i));
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double nt_xent_latent(const LatentConfiguration& z, double tau) {
  const Eigen::MatrixXd u = normalize_columns(z.points);
  double total = 0.0;
  for (int i = 0; i < z.size(); ++i) {
    double neg = 0.0;
    for (int j = 0; j < z.size(); ++j)
      if (j != i) neg += z.weights(j) * std::exp((u.col(i).dot(u.col(j)) - 1.0) / tau);
    total += z.weights(i) * std::log1p(2.0 * neg);
  }
  return total;
}

namespace {

Eigen::VectorXd checked_embed(const Embedding& embed, const Eigen::VectorXd& x, int index) {
  Eigen::VectorXd y = embed(x);
  if (!(y.norm() > 0.0))
    throw std::domain_error("zero embedding at point " + std::to_string(index));
  return y;
}

/// One random perturbation map T, keyed so that T(x_i) is fixed per index.
Eigen::MatrixXd perturbed_view(const Eigen::MatrixXd& points, const PerturbationSet& perturb,
                               std::uint64_t key) {
  if (perturb.mode == PerturbationMode::IdentityOnly) return points;
  Eigen::MatrixXd out(points.rows(), points.cols());
  if (perturb.mode == PerturbationMode::FiniteList) {
    const int atom = static_cast<int>(key % perturb.draws.size());
    for (Eigen::Index i = 0; i < points.cols(); ++i) out.col(i) = apply_atom(points.col(i), perturb, atom);
    return out;
  }
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    out.col(i) = apply_perturbation(points.col(i), perturb, splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(i))));
  return out;
}

Eigen::MatrixXd embed_all(const Eigen::MatrixXd& points, const Embedding& embed, bool require_nonzero) {
  Eigen::MatrixXd z;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    Eigen::VectorXd y = require_nonzero ? checked_embed(embed, points.col(i), static_cast<int>(i))
                                        : embed(points.col(i));
    if (i == 0) z.resize(y.size(), points.cols());
    z.col(i) = y;
  }
  return z;
}

/// Two-view value for fixed embedded views a = f(T X), b = f(T' X).
double two_view_value(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SimilarityConfig& cfg) {
  const Eigen::Index n = a.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double num = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) num += cfg.eta_value(0.5 * (a.col(i) - b.col(j)).squaredNorm());
    const double den = cfg.eta_value(0.5 * (a.col(i) - b.col(i)).squaredNorm());
    total += cfg.psi_value(num * inv_n / den);
  }
  return total * inv_n;
}

McEstimate summarize(const std::vector<double>& values) {
  McEstimate est;
  est.samples = static_cast<int>(values.size());
  if (values.empty()) return est;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  est.mean = mean;
  if (values.size() > 1) {
    var /= static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

void require_samples(int mc_samples) {
  if (mc_samples < 1) throw std::invalid_argument("Monte Carlo sample count must be positive");
}

}  // namespace

McEstimate nt_xent_original(const Eigen::MatrixXd& points, const Embedding& embed,
                            const PerturbationSet& perturb, double tau, int mc_samples,
                            std::uint64_t seed) {
  require_samples(mc_samples);
  if (!(tau > 0.0)) throw std::invalid_argument("nt_xent_original: tau must be positive");
  const Eigen::Index n = points.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(mc_samples));
  for (int s = 0; s < mc_samples; ++s) {
    const std::uint64_t key = splitmix64(seed + static_cast<std::uint64_t>(s));
    const Eigen::MatrixXd a = normalize_columns(embed_all(perturbed_view(points, perturb, splitmix64(key ^ 1)), embed, true));
    const Eigen::MatrixXd b = normalize_columns(embed_all(perturbed_view(points, perturb, splitmix64(key ^ 2)), embed, true));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double neg = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        neg += inv_n * (std::exp(a.col(i).dot(a.col(j)) / tau) + std::exp(a.col(i).dot(b.col(j)) / tau));
      }
      total += std::log1p(neg / std::exp(a.col(i).dot(b.col(i)) / tau));
    }
    values.push_back(total * inv_n);
  }
  return summarize(values);
}

McEstimate full_loss_two_view(const Eigen::MatrixXd& points, const Embedding& embed,
                              const PerturbationSet& perturb, const SimilarityConfig& cfg,
                              int mc_samples, std::uint64_t seed) {
  require_samples(mc_samples);
  cfg.validate();
  if (cfg.eta_value(0.0) == 0.0) throw std::invalid_argument("full_loss_two_view: eta(0) = 0");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(mc_samples));
  for (int s = 0; s < mc_samples; ++s) {
    const std::uint64_t key = splitmix64(seed + static_cast<std::uint64_t>(s));
    const Eigen::MatrixXd a = embed_all(perturbed_view(points, perturb, splitmix64(key ^ 1)), embed, false);
    const Eigen::MatrixXd b = embed_all(perturbed_view(points, perturb, splitmix64(key ^ 2)), embed, false);
    values.push_back(two_view_value(a, b, cfg));
  }
  return summarize(values);
}

double full_loss_two_view_exact(const Eigen::MatrixXd& points, const Embedding& embed,
                                const PerturbationSet& perturb, const SimilarityConfig& cfg) {
  cfg.validate();
  if (!perturb.is_exact())
    throw std::invalid_argument("full_loss_two_view_exact: perturbation set must be finite");
  if (cfg.eta_value(0.0) == 0.0) throw std::invalid_argument("full_loss_two_view_exact: eta(0) = 0");
  const int atoms = perturb.atoms();
  std::vector<Eigen::MatrixXd> views;
  views.reserve(static_cast<std::size_t>(atoms));
  for (int k = 0; k < atoms; ++k) {
    Eigen::MatrixXd moved(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i) moved.col(i) = apply_atom(points.col(i), perturb, k);
    views.push_back(embed_all(moved, embed, false));
  }
  double total = 0.0;
  for (int t = 0; t < atoms; ++t)
    for (int u = 0; u < atoms; ++u)
      total += two_view_value(views[static_cast<std::size_t>(t)], views[static_cast<std::size_t>(u)], cfg);
  return total / static_cast<double>(atoms * atoms);
}

double vicreg_variance_default(const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.cols();
  const Eigen::VectorXd mean = z.rowwise().mean();
  double hinge = 0.0;
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    const double var = (z.row(k).array() - mean(k)).square().sum() / static_cast<double>(n - 1);
    hinge += std::max(0.0, 1.0 - std::sqrt(var));
  }
  return hinge / static_cast<double>(z.rows());
}

double vicreg_covariance_default(const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.cols();
  const Eigen::MatrixXd centered = z.colwise() - z.rowwise().mean();
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n - 1);
  double off = 0.0;
  for (Eigen::Index a = 0; a < cov.rows(); ++a)
    for (Eigen::Index b = 0; b < cov.cols(); ++b)
      if (a != b) off += cov(a, b) * cov(a, b);
  return off;
}

VicregTerms VicregTerms::defaults() {
  return {vicreg_variance_default, vicreg_covariance_default};
}

double vicreg_latent(const LatentConfiguration& z, double lambda2, double lambda3,
                     const VicregTerms& terms) {
  if (z.size() < 2) throw std::invalid_argument("vicreg_latent: variance needs at least two points");
  return lambda2 * terms.variance(z.points) + lambda3 * terms.covariance(z.points);
}

double byol_latent(const LatentConfiguration& z,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& q) {
  double total = 0.0;
  for (int i = 0; i < z.size(); ++i) total += z.weights(i) * (q(z.points.col(i)) - z.points.col(i)).squaredNorm();
  return total;
}

}  // namespace clr
