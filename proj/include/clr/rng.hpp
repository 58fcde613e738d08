#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace clr {

/// Counter-based generator: the k-th draw of stream s under seed x is
/// splitmix64(key(x, s) + k * 0x9E3779B97F4A7C15). Draws depend only on
/// (seed, stream, counter), so results are identical on every platform and
/// independent streams can be handed to separate trajectories.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

  Eigen::VectorXd normal_vector(Eigen::Index dim);
  /// Uniform in the open ball of the given radius.
  Eigen::VectorXd uniform_in_ball(Eigen::Index dim, double radius);

  /// Independent generator keyed by this one's key and `id`.
  [[nodiscard]] CounterRng substream(std::uint64_t id) const;

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace clr
