#pragma once

#include <cstdint>
#include <random>

#include "fdrelay/types.hpp"

namespace fdrelay {

/// SplitMix64 finalizer. Bijective on 64-bit words; used to decorrelate
/// structured seed tuples.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives the seed of one Monte-Carlo trial:
///   mix(master, i, j) = splitmix64(splitmix64(splitmix64(master) ^ i) ^ j)
/// where i is the sweep index and j the trial index. Depends only on the
/// tuple, so trials can run in any order and adding solvers never shifts
/// channel draws.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t sweep_index, std::uint64_t trial_index);

/// Deterministic random source for complex Gaussian draws.
///
/// CN(0, v) means real and imaginary parts i.i.d. N(0, v/2).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream for a named purpose (channel draw, noise, init...).
  Rng fork(std::uint64_t tag) const { return Rng(splitmix64(seed_material() ^ splitmix64(tag))); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  cdouble complex_gaussian(double variance = 1.0);
  CMat complex_gaussian(Eigen::Index rows, Eigen::Index cols, double variance = 1.0);
  CVec complex_gaussian_vector(Eigen::Index n, double variance = 1.0);

 private:
  std::uint64_t seed_material() const;

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Haar-distributed n x n unitary (QR of a complex Gaussian, phases fixed).
CMat random_unitary(Eigen::Index n, Rng& rng);

}  // namespace fdrelay
