#pragma once

// Deliberately naive reference computations used as independent checks on
// the library. Nothing here calls into fdrelay numerics.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c = Mat::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      cd acc = 0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

inline Mat adjoint(const Mat& a) {
  Mat b(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) b(j, i) = std::conj(a(i, j));
  return b;
}

inline cd det2(const Mat& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline Mat inv2(const Mat& m) {
  const cd d = det2(m);
  Mat r(2, 2);
  r << m(1, 1) / d, -m(0, 1) / d, -m(1, 0) / d, m(0, 0) / d;
  return r;
}

/// Rate of a destination with two antennas written out with explicit 2x2
/// determinants and inverses.
inline double rate_2x2(const Mat& v, const Mat& q, const Mat& h_sr, const Mat& h_rd, double sr2, double sd2) {
  const Mat hqh = matmul(matmul(h_rd, q), h_sr);
  const Mat sig = matmul(matmul(hqh, matmul(v, adjoint(v))), adjoint(hqh));
  const Mat hq = matmul(h_rd, q);
  Mat noise = matmul(hq, adjoint(hq));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) noise(i, j) = sr2 * noise(i, j) + (i == j ? sd2 : 0.0);
  Mat m = matmul(sig, inv2(noise));
  m(0, 0) += 1.0;
  m(1, 1) += 1.0;
  return std::log(std::abs(det2(m)));
}

/// Sum of squared moduli, accumulated entry by entry.
inline double sum_sq(const Mat& a) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += std::norm(a(i, j));
  return s;
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration, and the
/// second one by deflation.
inline std::pair<double, double> top_two_eigs(const Mat& a, int iters = 20000) {
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> n;
  auto power = [&](const Mat& m) {
    Vec x(m.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cd(n(gen), n(gen));
    x /= x.norm();
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
      Vec y = matmul(m, x);
      const double ny = y.norm();
      if (ny == 0) return std::pair<double, Vec>{0.0, x};
      x = y / ny;
      lam = (x.adjoint() * matmul(m, x))(0, 0).real();
    }
    return std::pair<double, Vec>{lam, x};
  };
  const auto [l1, v1] = power(a);
  const Mat deflated = a - l1 * matmul(v1, adjoint(v1));
  // shift keeps the deflated matrix PSD so power iteration finds its top
  return {l1, power(deflated).first};
}

/// Maximizes x^H A1 x / x^H A2 x over x in C^2 with x^H A3 x = 0 by sweeping
/// the feasible set. With x = [1, t e^{j phi}], t >= 0, the constraint reads
///   a22 t^2 + 2 Re(a12 e^{j phi}) t + a11 = 0,
/// solved for t on a uniform phi grid; x = [0, 1] is added when a22 vanishes.
/// Returns -1 if nothing is feasible.
inline double brute_force_ratio_2x2(const Mat& a1, const Mat& a2, const Mat& a3, int points = 10000) {
  auto ratio = [&](const Vec& x) {
    return (x.adjoint() * a1 * x)(0, 0).real() / (x.adjoint() * a2 * x)(0, 0).real();
  };
  const double a11 = a3(0, 0).real(), a22 = a3(1, 1).real();
  const cd a12 = a3(0, 1);
  const double scale = std::max(1.0, a3.cwiseAbs().maxCoeff());
  double best = -1;
  auto try_t = [&](double t, const cd& phase) {
    if (!(t >= 0) || !std::isfinite(t)) return;
    Vec x(2);
    x << 1.0, t * phase;
    best = std::max(best, ratio(x));
  };
  const bool flat = std::abs(a22) <= 1e-12 * scale;
  if (flat) {
    Vec x(2);
    x << 0.0, 1.0;
    best = ratio(x);
  }
  for (int k = 0; k < points; ++k) {
    const cd phase = std::polar(1.0, 2 * std::numbers::pi * k / points);
    const double b = (a12 * phase).real();
    if (flat) {
      if (b != 0) try_t(-a11 / (2 * b), phase);
      continue;
    }
    const double disc = b * b - a11 * a22;
    if (disc < 0) continue;
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    if (q != 0) {
      try_t(q / a22, phase);
      try_t(a11 / q, phase);
    } else {
      try_t(0.0, phase);
    }
  }
  return best;
}

/// Central-difference gradient of a real function of a complex matrix over
/// stacked real coordinates, returned as d/dRe + j d/dIm (twice the
/// conjugate Wirtinger derivative).
inline Mat fd_gradient(const std::function<double(const Mat&)>& f, const Mat& x, double h = 1e-6) {
  Mat g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Mat p = x, m = x;
    p(i) += cd(h, 0);
    m(i) -= cd(h, 0);
    const double dre = (f(p) - f(m)) / (2 * h);
    p = x;
    m = x;
    p(i) += cd(0, h);
    m(i) -= cd(0, h);
    const double dim = (f(p) - f(m)) / (2 * h);
    g(i) = cd(dre, dim);
  }
  return g;
}

/// Solves A X + X B = C for Hermitian A, B through their eigenbases.
inline Mat sylvester_eig(const Mat& a, const Mat& b, const Mat& c) {
  Eigen::SelfAdjointEigenSolver<Mat> ea(a), eb(b);
  const Mat ua = ea.eigenvectors(), ub = eb.eigenvectors();
  Mat y = adjoint(ua) * c * ub;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) /= ea.eigenvalues()(i) + eb.eigenvalues()(j);
  return ua * y * adjoint(ub);
}

}  // namespace oracle
