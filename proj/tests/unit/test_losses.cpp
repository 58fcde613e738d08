#include <doctest.h>

#include <cmath>
#include <string>

#include "clr/losses.hpp"
#include "support.hpp"

using namespace clr;
using clr::test::random_matrix;
using clr::test::random_sphere;

namespace {

SimilarityConfig exp_cfg(double tau, PsiKind psi = PsiKind::Log1p) {
  SimilarityConfig c;
  c.tau = tau;
  c.psi = psi;
  return c;
}

// Direct double loop over (x, y) with uniform weights.
double loss_oracle(const Eigen::MatrixXd& z, double tau) {
  const int n = static_cast<int>(z.cols());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = 0.0;
    for (int j = 0; j < n; ++j) g += std::exp(-(z.col(i) - z.col(j)).squaredNorm() / (2.0 * tau));
    total += std::log(1.0 + g / n);
  }
  return total / n;
}

Eigen::VectorXd project_latent(const Eigen::VectorXd& x) { return x.head(2); }

}  // namespace

TEST_CASE("generalized loss closed forms") {
  const SimilarityConfig c = exp_cfg(1.0);
  CHECK(generalized_loss(LatentConfiguration(Eigen::MatrixXd::Constant(2, 1, 0.0)), c) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  Eigen::MatrixXd anti(2, 2);
  anti << 1, -1, 0, 0;
  const double expected = std::log1p((1.0 + std::exp(-2.0)) / 2.0);
  CHECK(generalized_loss(LatentConfiguration(anti), c) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(generalized_loss(LatentConfiguration(anti), c) == doctest::Approx(loss_oracle(anti, 1.0)).epsilon(1e-15));

  for (int K : {2, 5, 17}) {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(2, K, 0.0).colwise() + Eigen::Vector2d(0.6, 0.8);
    CHECK(generalized_loss(LatentConfiguration(same), c) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("generalized loss matches a direct double loop") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Eigen::MatrixXd z = random_sphere(3, 7, s);
    CHECK(generalized_loss(LatentConfiguration(z), exp_cfg(0.3)) == doctest::Approx(loss_oracle(z, 0.3)).epsilon(1e-13));
  }
}

TEST_CASE("losses are permutation invariant") {
  const Eigen::MatrixXd z = random_sphere(3, 9, 4);
  Eigen::MatrixXd p = z;
  p.col(0) = z.col(8);
  p.col(8) = z.col(0);
  p.col(3) = z.col(5);
  p.col(5) = z.col(3);
  for (PsiKind psi : {PsiKind::Log1p, PsiKind::Log1pHalf, PsiKind::Identity}) {
    const SimilarityConfig c = exp_cfg(0.2, psi);
    CHECK(generalized_loss(LatentConfiguration(p), c) == doctest::Approx(generalized_loss(LatentConfiguration(z), c)).epsilon(1e-14));
  }
  CHECK(nt_xent_latent(LatentConfiguration(p), 0.2) == doctest::Approx(nt_xent_latent(LatentConfiguration(z), 0.2)).epsilon(1e-14));
  CHECK(vicreg_latent(LatentConfiguration(p), 1.0, 1.0) == doctest::Approx(vicreg_latent(LatentConfiguration(z), 1.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("bringing two points closer raises the loss") {
  const SimilarityConfig c = exp_cfg(0.5);
  double prev = -1.0;
  for (double angle : {3.0, 2.5, 2.0, 1.5, 1.0, 0.5, 0.1}) {
    Eigen::MatrixXd z(2, 2);
    z << 1, std::cos(angle), 0, std::sin(angle);
    const double v = generalized_loss(LatentConfiguration(z), c);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("custom profile equal to exp decay gives the same loss") {
  SimilarityConfig c = exp_cfg(0.4);
  const Eigen::MatrixXd z = random_sphere(2, 6, 1);
  const double ref = generalized_loss(LatentConfiguration(z), c);
  const double tau = c.tau;
  c.custom_eta = CustomEta{[tau](double t) { return 3.0 * std::exp(-t / tau); },
                           [tau](double t) { return -3.0 * std::exp(-t / tau) / tau; },
                           [tau](double t) { return 3.0 * std::exp(-t / tau) / (tau * tau); }};
  CHECK(generalized_loss(LatentConfiguration(z), c) == doctest::Approx(ref).epsilon(1e-14));
  c.custom_eta->second = nullptr;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(exp_cfg(0.0).validate(), std::invalid_argument);
}

TEST_CASE("configuration validation") {
  LatentConfiguration z(random_sphere(2, 4, 0));
  CHECK_NOTHROW(z.validate(Constraint::Sphere));
  z.points(0, 1) *= 1.01;
  CHECK_THROWS_AS(z.validate(Constraint::Sphere), std::invalid_argument);
  CHECK_NOTHROW(z.validate(Constraint::Unconstrained));
  z.weights(0) += 1e-9;
  CHECK_THROWS_AS(z.validate(Constraint::Unconstrained), std::invalid_argument);
  CHECK_THROWS_AS(LatentConfiguration(random_sphere(2, 4, 0), Eigen::VectorXd::Ones(3)), std::invalid_argument);
  CHECK(parse_psi(to_string(PsiKind::Log1pHalf)) == PsiKind::Log1pHalf);
  CHECK_THROWS_AS(parse_psi("softplus"), std::invalid_argument);
}

TEST_CASE("latent NT-Xent agrees with its mass form on the sphere") {
  const Eigen::MatrixXd z = random_sphere(3, 8, 2);
  const LatentConfiguration lc(z);
  const double tau = 0.25;
  const Eigen::VectorXd G = similarity_mass(lc, exp_cfg(tau));
  double expected = 0.0;
  for (int i = 0; i < 8; ++i) expected += std::log1p(2.0 * (G(i) - 1.0 / 8.0)) / 8.0;
  CHECK(nt_xent_latent(lc, tau) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("original NT-Xent small cases") {
  const Embedding id = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x); };
  const PerturbationSet none = PerturbationSet::identity();

  const Eigen::MatrixXd one = Eigen::Vector2d(1.0, 0.0);
  CHECK(nt_xent_original(one, id, none, 1.0, 3).mean == 0.0);

  Eigen::MatrixXd anti(2, 2);
  anti << 1, -1, 0, 0;
  // For each x the negatives are y and its second view, both at cosine -1,
  // weighted by 1/n, against the positive pair at cosine 1.
  const double tau = 1.0;
  double oracle = 0.0;
  for (int x = 0; x < 2; ++x) {
    double neg = 0.0;
    for (int y = 0; y < 2; ++y)
      if (y != x) neg += 0.5 * 2.0 * std::exp(anti.col(x).dot(anti.col(y)) / tau);
    oracle += 0.5 * std::log(1.0 + neg / std::exp(1.0 / tau));
  }
  const McEstimate est = nt_xent_original(anti, id, none, tau, 4);
  CHECK(est.mean == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(est.mean == doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-15));
  CHECK(est.std_error == 0.0);

  const Embedding twice = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * x); };
  const Eigen::MatrixXd pts = random_matrix(2, 5, 9);
  CHECK(nt_xent_original(pts, twice, none, 0.5, 2).mean == doctest::Approx(nt_xent_original(pts, id, none, 0.5, 2).mean).epsilon(1e-14));
}

TEST_CASE("zero embedding names the point") {
  const Embedding first = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.head(2)); };
  Eigen::MatrixXd pts(3, 3);
  pts << 1, 0, 0,
         0, 1, 0,
         0, 0, 1;
  try {
    nt_xent_original(pts, first, PerturbationSet::identity(), 1.0, 1);
    FAIL("expected a domain error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("point 2") != std::string::npos);
  }
}

TEST_CASE("two view loss with identity views is the latent loss") {
  const Embedding f = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(Eigen::Vector2d(std::tanh(x(0) + 0.3 * x(2)), std::sin(x(1))));
  };
  const Eigen::MatrixXd pts = random_matrix(3, 6, 5);
  Eigen::MatrixXd z(2, 6);
  for (int i = 0; i < 6; ++i) z.col(i) = f(pts.col(i));
  const SimilarityConfig c = exp_cfg(0.7);
  const double latent = generalized_loss(LatentConfiguration(z), c);
  CHECK(full_loss_two_view(pts, f, PerturbationSet::identity(), c, 3).mean == doctest::Approx(latent).epsilon(1e-14));
  CHECK(full_loss_two_view_exact(pts, f, PerturbationSet::identity(), c) == doctest::Approx(latent).epsilon(1e-14));
}

TEST_CASE("invariant embedding does not see orthogonal noise") {
  const Eigen::MatrixXd pts = random_matrix(4, 6, 8);
  const SimilarityConfig c = exp_cfg(0.5);
  const double clean = full_loss_two_view(pts, project_latent, PerturbationSet::identity(), c, 1).mean;
  const McEstimate noisy = full_loss_two_view(pts, project_latent, PerturbationSet::orthogonal_noise(2, 0.3), c, 50, 3);
  CHECK(noisy.mean == doctest::Approx(clean).epsilon(1e-14));
  CHECK(noisy.std_error == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("a non-invariant embedding pays for the perturbations") {
  // Two points, ν uniform on {+δ e_3, -δ e_3}, f(x) = (x_1, x_2 + x_3).
  const double delta = 0.4, tau = 0.5;
  Eigen::MatrixXd pts(3, 2);
  pts << 1, 0,
         0, 1,
         0, 0;
  const PerturbationSet nu = PerturbationSet::finite_list(2, {Eigen::Vector3d(0, 0, delta), Eigen::Vector3d(0, 0, -delta)});
  const Embedding f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(Eigen::Vector2d(x(0), x(1) + x(2))); };
  const SimilarityConfig c = exp_cfg(tau);
  const double leaky = full_loss_two_view_exact(pts, f, nu, c);
  const double projected = full_loss_two_view_exact(pts, project_latent, nu, c);

  // Enumerate (T, T') directly.
  const double shifts[2] = {delta, -delta};
  double oracle = 0.0;
  for (double s : shifts)
    for (double t : shifts)
      for (int x = 0; x < 2; ++x) {
        const Eigen::Vector2d a = f(pts.col(x) + Eigen::Vector3d(0, 0, s));
        double num = 0.0;
        for (int y = 0; y < 2; ++y) num += 0.5 * std::exp(-(a - f(pts.col(y) + Eigen::Vector3d(0, 0, t))).squaredNorm() / (2 * tau));
        const double den = std::exp(-(a - f(pts.col(x) + Eigen::Vector3d(0, 0, t))).squaredNorm() / (2 * tau));
        oracle += 0.25 * 0.5 * std::log1p(num / den);
      }
  CHECK(leaky == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(leaky > projected);
  CHECK_THROWS_AS(full_loss_two_view_exact(pts, f, PerturbationSet::orthogonal_noise(2, 0.1), c), std::invalid_argument);
}

TEST_CASE("degenerate profile is rejected") {
  SimilarityConfig c;
  c.custom_eta = CustomEta{[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  const Embedding f = project_latent;
  CHECK_THROWS_AS(full_loss_two_view(random_matrix(3, 2, 0), f, PerturbationSet::identity(), c, 1), std::invalid_argument);
}

TEST_CASE("vicreg latent terms") {
  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(3, 5, 0.7);
  CHECK(vicreg_variance_default(same) == 1.0);
  CHECK(vicreg_covariance_default(same) == 0.0);

  for (int n : {2, 3, 6}) {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    // Unbiased covariance of the standard basis: off-diagonal entries -1/(n(n-1)).
    double direct = 0.0;
    const Eigen::VectorXd mean = eye.rowwise().mean();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        double cov = 0.0;
        for (int i = 0; i < n; ++i) cov += (eye(a, i) - mean(a)) * (eye(b, i) - mean(b));
        cov /= n - 1;
        direct += cov * cov;
      }
    CHECK(vicreg_covariance_default(eye) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(direct == doctest::Approx(1.0 / (n * (n - 1.0))).epsilon(1e-14));
  }

  const LatentConfiguration z(random_matrix(3, 7, 1));
  CHECK(vicreg_latent(z, 2.0, 4.0) == doctest::Approx(2.0 * vicreg_latent(z, 1.0, 2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(vicreg_latent(LatentConfiguration(random_matrix(3, 1, 1)), 1.0, 1.0), std::invalid_argument);

  VicregTerms custom{[](const Eigen::MatrixXd&) { return 3.0; }, [](const Eigen::MatrixXd&) { return 5.0; }};
  CHECK(vicreg_latent(z, 1.0, 2.0, custom) == 13.0);
}

TEST_CASE("byol latent") {
  const LatentConfiguration z(random_sphere(3, 5, 3));
  CHECK(byol_latent(z, [](const Eigen::VectorXd& y) { return Eigen::VectorXd(y); }) == 0.0);
  CHECK(byol_latent(z, [](const Eigen::VectorXd& y) { return Eigen::VectorXd(2.0 * y); }) == doctest::Approx(1.0).epsilon(1e-15));

  const Eigen::MatrixXd A = random_matrix(3, 3, 4);
  const Eigen::VectorXd b = random_matrix(3, 1, 5);
  const auto q = [&](const Eigen::VectorXd& y) { return Eigen::VectorXd(A * y + b); };
  const LatentConfiguration r(random_matrix(3, 5, 6));
  double direct = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd y = r.points.col(i);
    for (int k = 0; k < 3; ++k) {
      double v = b(k) - y(k);
      for (int l = 0; l < 3; ++l) v += A(k, l) * y(l);
      direct += v * v / 5.0;
    }
  }
  CHECK(byol_latent(r, q) == doctest::Approx(direct).epsilon(1e-14));
}
