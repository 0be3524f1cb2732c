#pragma once

#include <cstdint>

#include "fdrelay/config.hpp"
#include "fdrelay/types.hpp"

namespace fdrelay {

/// Channel matrices of one fading block.
struct ChannelSet {
  CMat h_sr;  ///< source -> relay, n_r x n_s
  CMat h_rd;  ///< relay -> destination, n_d x n_t
  CMat h_rr;  ///< residual self-interference, relay output -> input, n_r x n_t
};

/// A candidate solution: source beamformer and relay amplification matrix.
struct Precoders {
  CMat v;  ///< n_s x d
  CMat q;  ///< n_t x n_r
};

struct FeasibilityReport {
  double source_power = 0;
  double relay_power = 0;
  double si_residual_inf = 0;  ///< max |entry| of Q H_RR Q
  bool source_ok = false;
  bool relay_ok = false;
  bool si_ok = false;

  bool all_ok() const { return source_ok && relay_ok && si_ok; }
};

/// Rayleigh block fading: H_SR and H_RD entries CN(0, 1), H_RR entries
/// CN(0, sigma_rr2). Deterministic in (config, seed).
ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed);

void check_dimensions(const ChannelSet& ch, const SystemConfig& config);
void check_dimensions(const Precoders& p, const ChannelSet& ch, const SystemConfig& config);

/// log det of a Hermitian positive definite matrix (Cholesky).
double log_det_hpd(const CMat& a);

/// End-to-end rate in nats, with the residual self-interference loop assumed
/// zero-forced:
///   log det(I + H_RD Q H_SR V V^H H_SR^H Q^H H_RD^H
///               (sigma_R^2 H_RD Q Q^H H_RD^H + sigma_D^2 I)^{-1})
double rate(const Precoders& p, const ChannelSet& ch, const SystemConfig& config);

/// Same expression written in terms of the relay's effective source signal
/// S = Q H_SR V; used by the penalty solver where S and Q are decoupled.
double rate_sq(const CMat& s, const CMat& q, const CMat& h_rd, const SystemConfig& config);

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

/// trace(Q H_SR V V^H H_SR^H Q^H) + sigma_R^2 trace(Q Q^H).
double relay_power(const Precoders& p, const ChannelSet& ch, const SystemConfig& config);

double source_power(const Precoders& p);

/// Largest entry modulus of Q H_RR Q.
double si_residual_inf(const CMat& q, const CMat& h_rr);

/// Checks the three constraints of the rate maximization problem. Power
/// checks are relative (x <= P (1 + tol_power)); the SI check is absolute.
FeasibilityReport feasibility_report(const Precoders& p, const ChannelSet& ch, const SystemConfig& config,
                                     double tol_power, double tol_si);

}  // namespace fdrelay
