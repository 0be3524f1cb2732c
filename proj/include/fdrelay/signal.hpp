#pragma once

#include <cstdint>

#include "fdrelay/model.hpp"

namespace fdrelay {

/// Symbol-level realization of the relay link. Column n of each matrix is
/// the vector at time instant n.
struct SignalFrame {
  CMat s;        ///< d x L transmitted symbols, CN(0, I)
  CMat noise_r;  ///< n_r x L relay noise, CN(0, sigma_R^2 I)
  CMat noise_d;  ///< n_d x L destination noise, CN(0, sigma_D^2 I)
  CMat x_r;      ///< n_t x L relay output
  CMat r;        ///< n_r x L relay input
  CMat y_d;      ///< n_d x L destination observations
  int tau = 1;

  Eigen::Index length() const { return s.cols(); }
};

/// Useful-signal and interference-plus-noise covariance at the destination.
struct DestinationCovariances {
  CMat useful;
  CMat interference_noise;
};

struct LinkMeasurement {
  SignalFrame frame;
  DestinationCovariances measured;  ///< sample covariances after the warm-up window
  Eigen::Index warmup = 0;          ///< leading samples excluded from the estimates
  double loop_spectral_radius = 0;  ///< spectral radius of Q H_RR
  double empirical_rate = 0;        ///< log det(I + K_u K_in^{-1}), nats
  double empirical_sinr = 0;        ///< exp(empirical_rate) - 1
};

/// Covariances implied by the delay-free rate expression:
///   useful = H_RD Q H_SR V V^H H_SR^H Q^H H_RD^H,
///   interference_noise = sigma_R^2 H_RD Q Q^H H_RD^H + sigma_D^2 I.
DestinationCovariances closed_form_covariances(const Precoders& p, const ChannelSet& ch, const SystemConfig& config);

/// Runs the relay recursion r[n] = H_SR V s[n] + H_RR x_R[n] + n_R[n],
/// x_R[n] = Q r[n - tau], y_D[n] = H_RD x_R[n] + n_D[n] literally, with zero
/// relay state before n = tau. The useful term is H_RD Q H_SR V s[n - tau];
/// everything else in y_D (loop-back residue and noise) counts as
/// interference plus noise.
///
/// Throws ContractViolation if the loop map Q H_RR has spectral radius >= 1,
/// DimensionError on shape mismatch, std::invalid_argument if length < 1e4.
LinkMeasurement simulate_link(const Precoders& p, const ChannelSet& ch, const SystemConfig& config,
                              Eigen::Index length, std::uint64_t seed);

}  // namespace fdrelay
