#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "clr/rng.hpp"

namespace clr::test {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  CounterRng rng(seed, 77);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

inline Eigen::MatrixXd random_sphere(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  Eigen::MatrixXd m = random_matrix(d, n, seed);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j).normalize();
  return m;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.norm(), 1e-12);
  return (a - b).norm() / scale;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

/// Points at angles 2πk/n on the unit circle.
inline Eigen::MatrixXd circle_points(int n, double phase = 0.0) {
  Eigen::MatrixXd z(2, n);
  for (int k = 0; k < n; ++k) {
    const double a = phase + 2.0 * M_PI * k / n;
    z(0, k) = std::cos(a);
    z(1, k) = std::sin(a);
  }
  return z;
}

}  // namespace clr::test
