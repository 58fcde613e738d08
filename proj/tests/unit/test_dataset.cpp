#include <doctest.h>

#include <filesystem>

#include "clr/dataset.hpp"
#include "clr/rng.hpp"

using namespace clr;

TEST_CASE("counter rng is reproducible and stream separated") {
  CounterRng a(42, 1), b(42, 1), c(42, 2);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng u(7);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    mean += v;
  }
  CHECK(std::abs(mean / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("delta zero places points on orthogonal centers") {
  ClusterSpec spec;
  spec.ambient_dim = 4;
  spec.latent_dim = 2;
  spec.num_clusters = 2;
  spec.cluster_sizes = {1, 1};
  spec.center_norms = {1.0, 1.0};
  spec.noise_bound = 0.0;
  const ClusteredDataset d = generate(spec);
  REQUIRE(d.size() == 2);
  CHECK(d.points.col(0) == Eigen::Vector4d(1, 0, 0, 0));
  CHECK(d.points.col(1) == Eigen::Vector4d(0, 1, 0, 0));
  CHECK(d.centers.col(0).dot(d.centers.col(1)) == 0.0);
}

TEST_CASE("more clusters than latent dimensions is rejected") {
  ClusterSpec spec;
  spec.ambient_dim = 2;
  spec.latent_dim = 2;
  spec.num_clusters = 4;
  spec.cluster_sizes = {1, 1, 1, 1};
  spec.center_norms = {1, 1, 1, 1};
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

TEST_CASE("noise stays inside the requested ball") {
  ClusterSpec spec;
  spec.ambient_dim = 3;
  spec.latent_dim = 2;
  spec.num_clusters = 2;
  spec.cluster_sizes = {50, 50};
  spec.center_norms = {1.0, 1.0};
  spec.noise_bound = 0.05;
  spec.seed = 3;
  for (NoiseSplit split : {NoiseSplit::Split, NoiseSplit::OrthogonalOnly, NoiseSplit::ManifoldOnly}) {
    spec.split = split;
    const ClusteredDataset d = generate(spec);
    double worst = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      const Eigen::Vector3d c = d.centers.col(d.assignment[static_cast<std::size_t>(i)]);
      worst = std::max(worst, (d.points.col(i) - c).norm());
      if (split == NoiseSplit::OrthogonalOnly) CHECK((d.points.col(i).head(2) - c.head(2)).norm() == 0.0);
      if (split == NoiseSplit::ManifoldOnly) CHECK(d.points(2, i) == 0.0);
    }
    CHECK(worst < 0.05);
    CHECK(worst > 0.0);
  }
  const ClusteredDataset a = generate(spec), b = generate(spec);
  CHECK(a.points == b.points);
}

TEST_CASE("generated centers are orthogonal") {
  ClusterSpec spec;
  spec.ambient_dim = 6;
  spec.latent_dim = 4;
  spec.num_clusters = 4;
  spec.cluster_sizes = {3, 1, 2, 5};
  spec.center_norms = {1.0, 2.0, 0.5, 3.0};
  spec.noise_bound = 0.2;
  const ClusteredDataset d = generate(spec);
  for (int q = 0; q < 4; ++q)
    for (int r = 0; r < 4; ++r) {
      const double ip = d.centers.col(q).dot(d.centers.col(r));
      if (q == r) CHECK(ip > 0.0);
      else CHECK(std::abs(ip) <= 1e-12);
    }
  CHECK(d.cluster_sizes() == std::vector<int>{3, 1, 2, 5});
  CHECK(d.centers.bottomRows(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("perturbation modes") {
  const Eigen::Vector3d x(1.0, 0.0, 0.0);
  CHECK(apply_perturbation(x, PerturbationSet::identity(), 5) == x);

  const PerturbationSet noise = PerturbationSet::orthogonal_noise(2, 0.1);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Eigen::VectorXd y = apply_perturbation(x, noise, s);
    CHECK(y(0) == 1.0);
    CHECK(y(1) == 0.0);
    CHECK(std::abs(y(2)) <= 0.1);
  }

  const PerturbationSet list = PerturbationSet::finite_list(2, {Eigen::Vector3d(0, 0, 0.5)});
  CHECK(apply_perturbation(Eigen::Vector3d(1, 2, 0), list, 0) == Eigen::Vector3d(1, 2, 0.5));
  CHECK_THROWS_AS(PerturbationSet::finite_list(2, {Eigen::Vector3d(0.1, 0, 0.5)}), std::invalid_argument);
}

TEST_CASE("dataset csv round trip") {
  ClusterSpec spec;
  spec.cluster_sizes = {4, 3};
  spec.noise_bound = 0.1;
  spec.seed = 11;
  const ClusteredDataset d = generate(spec);
  const auto path = std::filesystem::temp_directory_path() / "clr_unit_dataset.csv";
  write_dataset_csv(path, d);
  const ClusteredDataset back = read_dataset_csv(path, spec.latent_dim);
  CHECK(back.points == d.points);
  CHECK(back.assignment == d.assignment);
  std::filesystem::remove(path);
}
