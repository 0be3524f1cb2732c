#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fdrelay/model.hpp"

namespace fdrelay {

/// Rank-one relay Q = x_t x_r^H with its source beamformer.
struct Rank1Solution {
  CVec x_t;  ///< unit norm
  CVec x_r;  ///< scaled so the relay power budget is met with equality
  CMat v;    ///< n_s x d, first column carries the full source power, the rest are zero
  double achieved_sinr = 0;
  double achieved_rate = 0;  ///< nats
  int iterations = 0;

  CMat q() const { return x_t * x_r.adjoint(); }
  Precoders precoders() const { return {v, q()}; }
};

/// Pi = I - g g^H / ||g||^2 with g = H_RR^H x_r: the orthogonal projector onto
/// the transmit directions that do not leak into x_r through H_RR.
/// Throws DegenerateError if ||g|| < 1e-12.
CMat projection_pi(const CVec& x_r, const CMat& h_rr);

struct TopEigenpair {
  double lambda = 0;  ///< largest eigenvalue of H_RD Pi H_RD^H
  CVec u1;            ///< its unit eigenvector (n_d)
  double gap = 0;     ///< lambda_1 - lambda_2
};

TopEigenpair lambda_max(const CVec& x_r, const CMat& h_rr, const CMat& h_rd);

/// Conjugate (Wirtinger) gradient d lambda_max / d conj(x_r):
///   -H_RR H_RD^H u1 u1^H H_RD g / ||g||^2 + |u1^H H_RD g|^2 H_RR g / ||g||^4.
/// The gradient over stacked real coordinates (Re x, Im x) is 2 Re, 2 Im of it.
/// Throws DegenerateError when the top eigenvalue gap is below `min_gap`.
CVec lambda_max_gradient(const CVec& x_r, const CMat& h_rr, const CMat& h_rd, double min_gap = 1e-9);

/// Effective SINR of the best rank-one design whose receive vector points
/// along x_r (source and relay powers at their budgets, SI zero-forced):
///   P_S a lambda / (sigma_R^2 n lambda + (sigma_D^2 / P_R)(P_S a + sigma_R^2 n)),
/// a = ||H_SR^H x_r||^2, n = ||x_r||^2. Invariant to nonzero scaling of x_r.
double rank1_objective(const CVec& x_r, const ChannelSet& ch, const SystemConfig& config);

struct ObjectiveGradient {
  double value = 0;
  CVec gradient;  ///< conjugate Wirtinger gradient
  double eig_gap = 0;
};

ObjectiveGradient rank1_objective_gradient(const CVec& x_r, const ChannelSet& ch, const SystemConfig& config,
                                           double min_gap = 1e-9);

/// Builds (V, x_t, x_r) from a receive direction: V along H_SR^H x_r at full
/// source power, x_t the top eigenvector of Pi H_RD^H H_RD Pi, x_r rescaled
/// so the relay power equals P_R. If H_RR^H x_r vanishes, Pi is the identity.
Rank1Solution recover_solution(const CVec& x_r, const ChannelSet& ch, const SystemConfig& config);

/// Assembles a solution from a unit transmit vector and a receive direction
/// that already satisfy x_r^H H_RR x_t = 0; only rescales x_r and builds V.
Rank1Solution assemble_rank1(const CVec& x_t, const CVec& x_r_direction, const ChannelSet& ch,
                             const SystemConfig& config);

struct GradientOptions {
  int starts = 5;
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_increase = 1e-4;
  /// Stop when ||grad|| <= grad_tol * max(1, f) at unit-norm x_r.
  double grad_tol = 1e-6;
  int max_iters = 5000;
  std::uint64_t seed = 0;
  /// Optional extra starting direction tried before the random ones.
  std::optional<CVec> initial;
};

struct AscentTrace {
  std::vector<std::vector<double>> objective;  ///< per start, value after every accepted step
  std::vector<int> iterations;
  std::vector<bool> converged;
  int tie_perturbations = 0;
};

/// Multi-start Armijo gradient ascent on rank1_objective; returns the best start.
Rank1Solution gradient_ascent(const ChannelSet& ch, const SystemConfig& config, const GradientOptions& opts = {},
                              AscentTrace* trace = nullptr);

/// Transmit-side zero forcing: x_r = top eigenvector of H_SR H_SR^H, then x_t
/// from the projected transmit problem. Asymptotically optimal as N_D N_T grows.
Rank1Solution tzf(const ChannelSet& ch, const SystemConfig& config);

/// Receive-side zero forcing: x_t = top eigenvector of H_RD^H H_RD, then x_r
/// maximizes ||x_r^H H_SR||^2 / ||x_r||^2 subject to x_r^H H_RR x_t = 0.
/// Asymptotically optimal as N_S N_R grows.
Rank1Solution rzf(const ChannelSet& ch, const SystemConfig& config);

/// Closed-form rank-one optimum when the SI constraint is dropped
/// (both vectors are top eigenvectors); an upper bound for every rank-one design.
Rank1Solution rank1_without_si(const ChannelSet& ch, const SystemConfig& config);

/// Unit top eigenvector of a Hermitian matrix.
CVec top_eigenvector(const CMat& hermitian);

}  // namespace fdrelay
