#include "fdrelay/random.hpp"

#include <cmath>

namespace fdrelay {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t sweep_index, std::uint64_t trial_index) {
  return splitmix64(splitmix64(splitmix64(master) ^ sweep_index) ^ trial_index);
}

std::uint64_t Rng::seed_material() const {
  // A copy of the engine is advanced so forking never perturbs this stream.
  std::mt19937_64 probe = engine_;
  return probe();
}

cdouble Rng::complex_gaussian(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {s * re, s * im};
}

CMat Rng::complex_gaussian(Eigen::Index rows, Eigen::Index cols, double variance) {
  CMat m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_gaussian(variance);
  }
  return m;
}

CVec Rng::complex_gaussian_vector(Eigen::Index n, double variance) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_gaussian(variance);
  return v;
}

CMat random_unitary(Eigen::Index n, Rng& rng) {
  const CMat g = rng.complex_gaussian(n, n);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(n, n);
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

}  // namespace fdrelay
