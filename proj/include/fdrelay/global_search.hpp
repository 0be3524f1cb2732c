#pragma once

#include <string>
#include <vector>

#include "fdrelay/rank1.hpp"

namespace fdrelay {

/// Fixed-lambda reformulation of the rank-one problem:
///   v(lambda1) = max x^H A1 x / x^H A2 x  s.t.  x^H A3 x = 0
/// with A1 = lambda1 P_S H_SR H_SR^H,
///      A2 = sigma_R^2 (lambda1 + sigma_D^2/P_R) I + sigma_D^2 (P_S/P_R) H_SR H_SR^H,
///      A3 = H_RR (H_RD^H H_RD - lambda1_tilde I) H_RR^H,
///      lambda1_tilde = trace(H_RD^H H_RD) - lambda1.
struct QuadRatioInstance {
  CMat a1, a2, a3;
  double lambda1 = 0;
  double lambda1_tilde = 0;
};

QuadRatioInstance quad_ratio_instance(const ChannelSet& ch, const SystemConfig& config, double lambda1);

struct FixedLambdaSolution {
  bool valid = false;
  double value = 0;  ///< v(lambda1)
  CVec x_r;          ///< maximizer, satisfies x^H A3 x = 0
  double mu1 = 0, mu2 = 0;
  int z = 0;  ///< +1 / -1 winner, 0 for the semidefinite (zero-eigenvector) branch
  std::string diagnostic;
};

/// Closed-form v(lambda1) for 2x2 instances: diagonalize A3 = U Sigma U^H,
/// restrict to x~ = [e^{j phi}, sqrt(mu1/mu2)] and compare z = cos(phi - angle a12) = +-1.
/// A semidefinite A3 yields its null eigenvector when singular, otherwise no feasible point.
FixedLambdaSolution solve_fixed_lambda(const QuadRatioInstance& inst);

struct GlobalSearchOptions {
  int grid_points = 1000;
  int refine_brackets = 3;
  double refine_tol = 1e-13;
};

struct GlobalSearchReport {
  double best_lambda1 = 0;
  double best_value = 0;
  int skipped_points = 0;
  int evaluations = 0;  ///< closed-form v(lambda1) evaluations, grid and refinement
  std::vector<std::string> diagnostics;
};

/// Global optimum of the rank-one problem for N_T = N_R = 2 by a
/// one-dimensional search over lambda1_tilde in [lambda_min, lambda_max] of
/// H_RD^H H_RD, followed by golden-section refinement around the best grid
/// points. Throws DimensionError if n_t or n_r differs from 2.
Rank1Solution global_search_2x2(const ChannelSet& ch, const SystemConfig& config,
                                const GlobalSearchOptions& opts = {}, GlobalSearchReport* report = nullptr);

}  // namespace fdrelay
