#include <doctest.h>

#include <cmath>

#include "clr/variations.hpp"
#include "support.hpp"

using namespace clr;
using clr::test::circle_points;
using clr::test::random_matrix;
using clr::test::random_sphere;
using clr::test::rel_err;

namespace {

SimilarityConfig cfg_of(double tau, PsiKind psi = PsiKind::Log1p, Constraint c = Constraint::Sphere) {
  SimilarityConfig s;
  s.tau = tau;
  s.psi = psi;
  s.constraint = c;
  return s;
}

// Uniform-weight loss evaluated from scratch for the difference oracles.
double loss_direct(const Eigen::MatrixXd& z, double tau, PsiKind psi) {
  const int n = static_cast<int>(z.cols());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = 0.0;
    for (int j = 0; j < n; ++j) g += std::exp(-(z.col(i) - z.col(j)).squaredNorm() / (2.0 * tau)) / n;
    total += psi == PsiKind::Log1p ? std::log1p(g) : psi == PsiKind::Log1pHalf ? std::log1p(0.5 * g) : g;
  }
  return total / n;
}

Eigen::MatrixXd location_field(const Eigen::MatrixXd& per_location, const std::vector<int>& loc) {
  Eigen::MatrixXd h(per_location.rows(), static_cast<Eigen::Index>(loc.size()));
  for (std::size_t i = 0; i < loc.size(); ++i) h.col(static_cast<Eigen::Index>(i)) = per_location.col(loc[i]);
  return h;
}

}  // namespace

TEST_CASE("gradient vanishes on coincident points") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(3, 6, 0.0).colwise() + Eigen::Vector3d(0, 0.6, 0.8);
  const VariationReport r = invariant_gradient(LatentConfiguration(z), cfg_of(0.1));
  CHECK(r.max_gradient_norm == 0.0);
  CHECK(r.max_tangential_norm == 0.0);
}

TEST_CASE("two point gradients are opposite") {
  Eigen::MatrixXd z(2, 2);
  z << 0.6, -0.6, 0.8, -0.8;
  const VariationReport r = invariant_gradient(LatentConfiguration(z), cfg_of(0.5));
  CHECK((r.euclidean.col(0) + r.euclidean.col(1)).norm() <= 1e-15);
  CHECK(r.euclidean.col(0).norm() > 0.0);
}

TEST_CASE("gradient matches central differences of a direct loss") {
  for (PsiKind psi : {PsiKind::Log1p, PsiKind::Log1pHalf, PsiKind::Identity}) {
    const Eigen::MatrixXd z = random_matrix(3, 6, 10 + static_cast<int>(psi), 0.7);
    const double tau = 0.4, h = 1e-5;
    Eigen::MatrixXd fd(3, 6);
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 3; ++k) {
        Eigen::MatrixXd up = z, down = z;
        up(k, i) += h;
        down(k, i) -= h;
        // The functional gradient is n times the partial derivative.
        fd(k, i) = 6.0 * (loss_direct(up, tau, psi) - loss_direct(down, tau, psi)) / (2 * h);
      }
    const VariationReport r = invariant_gradient(LatentConfiguration(z), cfg_of(tau, psi, Constraint::Unconstrained));
    CHECK(rel_err(r.euclidean, fd) <= 1e-6);
    CHECK(rel_err(finite_difference_gradient(LatentConfiguration(z), cfg_of(tau, psi, Constraint::Unconstrained)), fd) <= 1e-8);
  }
}

TEST_CASE("tangential part is orthogonal to the point") {
  const Eigen::MatrixXd z = random_sphere(3, 9, 2);
  const VariationReport r = invariant_gradient(LatentConfiguration(z), cfg_of(0.2));
  for (int i = 0; i < 9; ++i) {
    CHECK(std::abs(r.tangential.col(i).dot(z.col(i))) <= 1e-10);
    CHECK(r.lambda(i) == doctest::Approx(r.euclidean.col(i).dot(z.col(i))).epsilon(1e-15));
  }
}

TEST_CASE("pairing vanishes for a zero direction") {
  const Eigen::MatrixXd pts = random_matrix(3, 4, 1);
  const Embedding f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.head(2)); };
  const Direction zero = [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(2)); };
  CHECK(first_variation_pairing(pts, f, PerturbationSet::identity(), cfg_of(0.5), zero) == 0.0);
}

TEST_CASE("pairing reduces to the latent gradient for identity views") {
  const Eigen::MatrixXd pts = random_matrix(3, 4, 2);
  const Embedding f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(Eigen::Vector2d(std::tanh(x(0)), x(1) * x(1))); };
  const Direction h = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(Eigen::Vector2d(x(1), std::cos(x(0)))); };
  const SimilarityConfig c = cfg_of(0.6, PsiKind::Log1p, Constraint::Unconstrained);
  Eigen::MatrixXd z(2, 4);
  for (int i = 0; i < 4; ++i) z.col(i) = f(pts.col(i));
  const VariationReport r = invariant_gradient(LatentConfiguration(z), c);
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) expected += r.euclidean.col(i).dot(h(pts.col(i))) / 4.0;
  CHECK(first_variation_pairing(pts, f, PerturbationSet::identity(), c, h) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pairing matches differences of the two view loss") {
  const Eigen::MatrixXd pts = random_matrix(4, 3, 3);
  const PerturbationSet nu = PerturbationSet::finite_list(2, {Eigen::Vector4d(0, 0, 0.3, -0.1), Eigen::Vector4d(0, 0, -0.2, 0.4)});
  const Eigen::MatrixXd W = random_matrix(2, 4, 4);
  const Embedding f = [W](const Eigen::VectorXd& x) { return Eigen::VectorXd((W * x).array().tanh()); };
  const Direction h = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(Eigen::Vector2d(x(2) - x(0), x(1) * x(3))); };
  const SimilarityConfig c = cfg_of(0.5, PsiKind::Log1p, Constraint::Unconstrained);
  const double eps = 1e-5;
  const Embedding up = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(f(x) + eps * h(x)); };
  const Embedding down = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(f(x) - eps * h(x)); };
  const double fd = (full_loss_two_view_exact(pts, up, nu, c) - full_loss_two_view_exact(pts, down, nu, c)) / (2 * eps);
  CHECK(rel_err(first_variation_pairing(pts, f, nu, c, h), fd) <= 1e-5);
  CHECK_THROWS_AS(first_variation_pairing(pts, f, PerturbationSet::orthogonal_noise(2, 0.1), c, h), std::invalid_argument);
}

TEST_CASE("roots of unity and a single point are stationary") {
  for (int n = 2; n <= 16; ++n) {
    const StationarityResult s = stationarity_check(LatentConfiguration(circle_points(n, 0.37)), cfg_of(0.1), 1e-10);
    CHECK(s.stationary);
    CHECK(s.report.lambda_spread <= 1e-12);
  }
  CHECK(stationarity_check(LatentConfiguration(Eigen::MatrixXd(Eigen::Vector2d(0, 1))), cfg_of(0.1)).stationary);
  CHECK_THROWS_AS(stationarity_check(LatentConfiguration(circle_points(3)), cfg_of(0.1, PsiKind::Log1p, Constraint::Unconstrained)),
                  std::invalid_argument);
}

TEST_CASE("unequal clusters at a small angle are not stationary") {
  Eigen::MatrixXd z(2, 5);
  for (int i = 0; i < 5; ++i) {
    const double a = i < 3 ? 0.0 : 0.3;
    z.col(i) << std::cos(a), std::sin(a);
  }
  const StationarityResult s = stationarity_check(LatentConfiguration(z), cfg_of(0.1));
  CHECK_FALSE(s.stationary);
  CHECK(s.report.max_tangential_norm > 1e-3);
}

TEST_CASE("second variation equals the second derivative along h") {
  const Eigen::MatrixXd z = random_sphere(2, 5, 6);
  const Eigen::MatrixXd h = random_matrix(2, 5, 7);
  for (PsiKind psi : {PsiKind::Log1p, PsiKind::Log1pHalf}) {
    const double tau = 0.3, eps = 1e-4;
    const double fd = (loss_direct(z + eps * h, tau, psi) - 2 * loss_direct(z, tau, psi) + loss_direct(z - eps * h, tau, psi)) / (eps * eps);
    CHECK(rel_err(second_variation_value(LatentConfiguration(z), cfg_of(tau, psi), h), fd) <= 1e-5);
  }
}

TEST_CASE("second variation trivial cases") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(2, 4, 0.0).colwise() + Eigen::Vector2d(1, 0);
  // h is a function of location, so one location means one value of h.
  const Eigen::MatrixXd h1 = random_matrix(2, 1, 1).replicate(1, 4);
  const SecondVariationReport k1 = second_variation(LatentConfiguration(one), 0.05, h1);
  CHECK(k1.value == 0.0);
  CHECK(k1.num_locations == 1);

  const Eigen::MatrixXd z = circle_points(3);
  const SecondVariationReport zero = second_variation(LatentConfiguration(z), 0.05, Eigen::MatrixXd::Zero(2, 3));
  CHECK(zero.value == 0.0);
  CHECK_FALSE(zero.condition_satisfied);
  CHECK_THROWS_AS(second_variation(LatentConfiguration(z), 0.05, Eigen::MatrixXd::Zero(2, 4)), std::invalid_argument);
}

TEST_CASE("directions meeting the sigma condition give positive second variation") {
  const int m = 3;
  for (int K : {2, 3}) {
    const Eigen::MatrixXd locs = circle_points(K);
    std::vector<int> loc;
    Eigen::MatrixXd z(2, K * m);
    for (int i = 0; i < K * m; ++i) {
      loc.push_back(i % K);
      z.col(i) = locs.col(i % K);
    }
    const double tau = 0.01;
    CounterRng rng(static_cast<std::uint64_t>(K), 9);
    int accepted = 0, tried = 0;
    while (accepted < 30 && tried < 10000) {
      ++tried;
      Eigen::MatrixXd per(2, K);
      for (int q = 0; q < K; ++q) per.col(q) = rng.normal_vector(2);
      const SecondVariationReport r = second_variation(LatentConfiguration(z), tau, location_field(per, loc));
      CHECK(r.num_locations == K);
      if (!r.condition_satisfied) continue;
      ++accepted;
      CHECK(r.sigma > 3.0 * K * K * tau);
      CHECK(r.value > 0.0);
    }
    CHECK(accepted == 30);
  }
}

TEST_CASE("scaled maps lose their gradient") {
  const SimilarityConfig c = cfg_of(1.0, PsiKind::Log1p, Constraint::Unconstrained);
  const LatentConfiguration same(Eigen::MatrixXd::Constant(2, 3, 0.4));
  for (double g : scaled_map_gradient_decay(same, c, {1.0, 10.0, 100.0})) CHECK(g == 0.0);

  Eigen::MatrixXd two(2, 2);
  two << 0, 1, 0, 0;
  const std::vector<double> ks{1.0, 10.0, 100.0};
  const std::vector<double> g = scaled_map_gradient_decay(LatentConfiguration(two), c, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    // Both points see G = (1 + e^{-k²/2})/2 and |∇L| = k e^{-k²/2} / (1 + G).
    const double k = ks[i];
    const double e = std::exp(-k * k / 2.0);
    const double expected = k * e / (1.0 + 0.5 * (1.0 + e));
    CHECK(g[i] == doctest::Approx(expected).epsilon(1e-12));
    if (i > 0) CHECK(g[i] < g[i - 1]);
  }
  CHECK(g.back() < 1e-10);
}

TEST_CASE("location grouping") {
  Eigen::MatrixXd z(2, 5);
  z << 1, 0, 1, 0, 1 + 1e-14,
       0, 1, 0, 1, 0;
  CHECK(group_locations(z) == std::vector<int>{0, 1, 0, 1, 0});
  CHECK(group_locations(z, 0.0) == std::vector<int>{0, 1, 0, 1, 2});
}
