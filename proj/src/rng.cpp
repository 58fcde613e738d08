#include "clr/rng.hpp"

#include <cmath>
#include <numbers>

namespace clr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return splitmix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Eigen::VectorXd CounterRng::normal_vector(Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
  return v;
}

Eigen::VectorXd CounterRng::uniform_in_ball(Eigen::Index dim, double radius) {
  if (dim == 0 || radius <= 0.0) return Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd dir = normal_vector(dim);
  double norm = dir.norm();
  while (norm == 0.0) {
    dir = normal_vector(dim);
    norm = dir.norm();
  }
  // u in [0,1) keeps the sample strictly inside the ball.
  double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
  if (r >= radius) r = std::nextafter(radius, 0.0);
  return dir * (r / norm);
}

CounterRng CounterRng::substream(std::uint64_t id) const {
  CounterRng child(0);
  child.key_ = splitmix64(key_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
  return child;
}

}  // namespace clr
