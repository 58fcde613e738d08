#include "clr/variations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clr {

VariationReport invariant_gradient(const LatentConfiguration& z, const SimilarityConfig& cfg) {
  const int n = z.size();
  const int d = z.dim();
  const double eta0 = cfg.eta_value(0.0);
  const Eigen::VectorXd G = similarity_mass(z, cfg);
  Eigen::VectorXd dpsi(n);
  for (int i = 0; i < n; ++i) dpsi(i) = cfg.psi_first(G(i));

  VariationReport r;
  const Eigen::MatrixXd D2 = pairwise_sq_distances(z.points);
  r.euclidean = Eigen::MatrixXd::Zero(d, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = z.weights(j) * (dpsi(i) + dpsi(j)) * cfg.eta_first(0.5 * D2(i, j)) / eta0;
      for (int k = 0; k < d; ++k) r.euclidean(k, i) += c * (z.points(k, i) - z.points(k, j));
    }
  }

  r.tangential = r.euclidean;
  r.lambda.resize(n);
  for (int i = 0; i < n; ++i) {
    r.lambda(i) = r.euclidean.col(i).dot(z.points.col(i));
    if (cfg.constraint == Constraint::Sphere) {
      const double norm = z.points.col(i).norm();
      if (norm > 0.0) {
        const Eigen::VectorXd u = z.points.col(i) / norm;
        r.tangential.col(i) -= r.tangential.col(i).dot(u) * u;
      }
    }
    r.max_gradient_norm = std::max(r.max_gradient_norm, r.euclidean.col(i).norm());
    r.max_tangential_norm = std::max(r.max_tangential_norm, r.tangential.col(i).norm());
  }
  r.lambda_spread = n > 0 ? r.lambda.maxCoeff() - r.lambda.minCoeff() : 0.0;
  return r;
}

Eigen::MatrixXd finite_difference_gradient(const LatentConfiguration& z,
                                           const SimilarityConfig& cfg, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be positive");
  Eigen::MatrixXd out(z.dim(), z.size());
  LatentConfiguration probe = z;
  for (int i = 0; i < z.size(); ++i) {
    for (int k = 0; k < z.dim(); ++k) {
      const double orig = z.points(k, i);
      probe.points(k, i) = orig + step;
      const double up = generalized_loss(probe, cfg);
      probe.points(k, i) = orig - step;
      const double down = generalized_loss(probe, cfg);
      probe.points(k, i) = orig;
      out(k, i) = (up - down) / (2.0 * step) / z.weights(i);
    }
  }
  return out;
}

namespace {

struct EmbeddedView {
  Eigen::MatrixXd f;  // f(T x_i)
  Eigen::MatrixXd h;  // h(T x_i)
};

EmbeddedView embed_view(const Eigen::MatrixXd& points, const Embedding& embed, const Direction& h,
                        const PerturbationSet& perturb, int atom) {
  EmbeddedView v;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Eigen::VectorXd x = apply_atom(points.col(i), perturb, atom);
    const Eigen::VectorXd fx = embed(x);
    const Eigen::VectorXd hx = h(x);
    if (hx.size() != fx.size())
      throw std::invalid_argument("first_variation_pairing: direction and embedding dimensions differ");
    if (i == 0) {
      v.f.resize(fx.size(), points.cols());
      v.h.resize(hx.size(), points.cols());
    }
    v.f.col(i) = fx;
    v.h.col(i) = hx;
  }
  return v;
}

}  // namespace

double first_variation_pairing(const Eigen::MatrixXd& points, const Embedding& embed,
                               const PerturbationSet& perturb, const SimilarityConfig& cfg,
                               const Direction& h) {
  cfg.validate();
  if (!perturb.is_exact())
    throw std::invalid_argument("first_variation_pairing: needs an identity or finite-list perturbation set");
  const int atoms = perturb.atoms();
  const Eigen::Index n = points.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<EmbeddedView> views;
  for (int k = 0; k < atoms; ++k) views.push_back(embed_view(points, embed, h, perturb, k));

  double total = 0.0;
  for (const auto& A : views) {
    for (const auto& Bv : views) {
      for (Eigen::Index x = 0; x < n; ++x) {
        double num = 0.0, dnum = 0.0;
        for (Eigen::Index y = 0; y < n; ++y) {
          const Eigen::VectorXd diff = A.f.col(x) - Bv.f.col(y);
          const double t = 0.5 * diff.squaredNorm();
          num += cfg.eta_value(t);
          dnum += cfg.eta_first(t) * diff.dot(A.h.col(x) - Bv.h.col(y));
        }
        num *= inv_n;
        dnum *= inv_n;
        const Eigen::VectorXd own = A.f.col(x) - Bv.f.col(x);
        const double t_own = 0.5 * own.squaredNorm();
        const double den = cfg.eta_value(t_own);
        const double dden = cfg.eta_first(t_own) * own.dot(A.h.col(x) - Bv.h.col(x));
        const double G = num / den;
        const double dG = dnum / den - num * dden / (den * den);
        total += cfg.psi_first(G) * dG;
      }
    }
  }
  return total * inv_n / static_cast<double>(atoms * atoms);
}

StationarityResult stationarity_check(const LatentConfiguration& z, const SimilarityConfig& cfg,
                                      double tol) {
  if (cfg.constraint != Constraint::Sphere)
    throw std::invalid_argument("stationarity_check: requires sphere mode");
  StationarityResult out;
  out.report = invariant_gradient(z, cfg);
  out.stationary = out.report.max_tangential_norm <= tol;
  return out;
}

double second_variation_value(const LatentConfiguration& z, const SimilarityConfig& cfg,
                              const Eigen::MatrixXd& h) {
  if (h.rows() != z.dim() || h.cols() != z.size())
    throw std::invalid_argument("second_variation: h must be d x n");
  const int n = z.size();
  const double eta0 = cfg.eta_value(0.0);
  const Eigen::VectorXd G = similarity_mass(z, cfg);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double first = 0.0, second = 0.0;
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd dz = z.points.col(i) - z.points.col(j);
      const Eigen::VectorXd dh = h.col(i) - h.col(j);
      const double t = 0.5 * dz.squaredNorm();
      const double a = dz.dot(dh);
      first += z.weights(j) * cfg.eta_first(t) * a;
      second += z.weights(j) * (cfg.eta_second(t) * a * a + cfg.eta_first(t) * dh.squaredNorm());
    }
    first /= eta0;
    second /= eta0;
    total += z.weights(i) * (cfg.psi_second(G(i)) * first * first + cfg.psi_first(G(i)) * second);
  }
  return total;
}

std::vector<int> group_locations(const Eigen::MatrixXd& points, double tol) {
  std::vector<int> label(static_cast<std::size_t>(points.cols()), -1);
  std::vector<Eigen::Index> reps;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((points.col(i) - points.col(reps[r])).norm() <= tol) {
        label[static_cast<std::size_t>(i)] = static_cast<int>(r);
        break;
      }
    }
    if (label[static_cast<std::size_t>(i)] < 0) {
      label[static_cast<std::size_t>(i)] = static_cast<int>(reps.size());
      reps.push_back(i);
    }
  }
  return label;
}

SecondVariationReport second_variation(const LatentConfiguration& z, double tau,
                                       const Eigen::MatrixXd& h) {
  SimilarityConfig cfg;
  cfg.tau = tau;
  cfg.psi = PsiKind::Log1pHalf;
  cfg.validate();

  SecondVariationReport r;
  r.value = second_variation_value(z, cfg, h);
  const std::vector<int> loc = group_locations(z.points);
  r.num_locations = loc.empty() ? 0 : *std::max_element(loc.begin(), loc.end()) + 1;

  double sigma = std::numeric_limits<double>::infinity();
  bool moving = false;
  for (int i = 0; i < z.size(); ++i) {
    for (int j = i + 1; j < z.size(); ++j) {
      const Eigen::VectorXd dh = h.col(i) - h.col(j);
      const double hh = dh.squaredNorm();
      if (hh == 0.0) continue;
      moving = true;
      const double a = (z.points.col(i) - z.points.col(j)).dot(dh);
      sigma = std::min(sigma, a * a / hh);
    }
  }
  r.sigma = moving ? sigma : 0.0;
  const double K = static_cast<double>(r.num_locations);
  r.condition_satisfied = moving && r.sigma > 3.0 * K * K * tau;
  return r;
}

std::vector<double> scaled_map_gradient_decay(const LatentConfiguration& z,
                                              const SimilarityConfig& cfg,
                                              const std::vector<double>& scales) {
  SimilarityConfig free = cfg;
  free.constraint = Constraint::Unconstrained;
  std::vector<double> out;
  out.reserve(scales.size());
  for (double k : scales) {
    LatentConfiguration scaled(k * z.points, z.weights);
    out.push_back(invariant_gradient(scaled, free).max_gradient_norm);
  }
  return out;
}

}  // namespace clr
