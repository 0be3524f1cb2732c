#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fdrelay/model.hpp"
#include "fdrelay/pbsum.hpp"

namespace fdrelay {

/// Primal blocks of the auxiliary-variable reformulation, the WMMSE
/// receiver/weight pair and the current penalty.
///
/// Coupling constraints (driven to zero by the penalty):
///   sigma_R Q = Q~,  S = S~,  V = V~,  R^H Q = 0,  R^H = Q H_RR,  Q H_SR V~ = S~.
/// R is n_t x n_t so that both R^H Q and R^H - Q H_RR are defined.
struct PBsumState {
  CMat q;        ///< n_t x n_r
  CMat v;        ///< n_s x d
  CMat s;        ///< n_t x d
  CMat s_tilde;  ///< n_t x d
  CMat q_tilde;  ///< n_t x n_r
  CMat v_tilde;  ///< n_s x d
  CMat r;        ///< n_t x n_t
  CMat u_bar;    ///< n_d x d
  CMat w_bar;    ///< d x d, Hermitian positive definite
  double rho = 0;
};

/// The six coupling residuals, in constraint order.
struct PenaltyResidualBlocks {
  CMat q_scaled;  ///< sigma_R Q - Q~
  CMat s;         ///< S - S~
  CMat v;         ///< V - V~
  CMat rq;        ///< R^H Q
  CMat loop;      ///< R^H - Q H_RR
  CMat relay;     ///< Q H_SR V~ - S~

  /// Sum of squared Frobenius norms.
  double squared_norm() const;
  /// Largest |Re| or |Im| over all entries.
  double inf_norm() const;
};

enum class Omega1Rule {
  /// Exact minimizer of ||Q~ - sigma_R Q||^2 + ||S~ - S||^2 + ||S~ - Q H_SR V~||^2
  /// over the relay power ball (S~ carries weight 2 about the midpoint).
  kExactWeighted,
  /// Uniform ball projection of (sigma_R Q, (S + Q H_SR V~)/2).
  kUniformBall,
};

struct FdPBsumOptions {
  Omega1Rule omega1 = Omega1Rule::kExactWeighted;
  bool include_si = true;  ///< false drops R and both SI penalty terms
  bool check_blocks = true;
  double block_slack = 1e-9;
};

/// Random feasible start: V = sqrt(P_S/d) times d columns of a random
/// unitary, Q Gaussian scaled to 90% of the relay budget, S = Q H_SR V,
/// Q~ = sigma_R Q, S~ = S, V~ = V, R from its closed form.
PBsumState init_state(const ChannelSet& ch, const SystemConfig& config, std::uint64_t seed, bool include_si = true);

struct ReceiverUpdate {
  CMat u_bar;
  CMat w_bar;
};

/// MMSE receiver and weight:
///   U = (H_RD S S^H H_RD^H + sigma_R^2 H_RD Q Q^H H_RD^H + sigma_D^2 I)^{-1} H_RD S,
///   W = (I - U^H H_RD S)^{-1}.
ReceiverUpdate update_receiver(const PBsumState& state, const ChannelSet& ch, const SystemConfig& config);

/// MSE matrix E(U, S, Q) = (I - U^H H S)(I - U^H H S)^H + sigma_R^2 U^H H Q Q^H H^H U + sigma_D^2 U^H U.
CMat mse_matrix(const CMat& u, const CMat& s, const CMat& q, const CMat& h_rd, const SystemConfig& config);

/// Projection of the stacked pair onto {||Q~||^2 + ||S~||^2 <= P_R}.
std::pair<CMat, CMat> project_omega1(const CMat& q_target, const CMat& s_target, double p_r);

/// Minimizer of ||Q~ - q_target||^2 + s_weight ||S~ - s_target||^2 over the same ball.
std::pair<CMat, CMat> minimize_omega1(const CMat& q_target, const CMat& s_target, double p_r, double s_weight);

/// Projection onto {||V||^2 <= P_S}.
CMat project_omega2(const CMat& v_tilde, double p_s);

/// R = (I + Q Q^H)^{-1} H_RR^H Q^H.
CMat update_r(const PBsumState& state, const ChannelSet& ch);

/// Solves A Q + Q B = C by Kronecker vectorization with
///   A = (sigma_R^2/rho) H_RD^H U W U^H H_RD + sigma_R^2 I + R R^H,
///   B = H_RR H_RR^H + H_SR V~ V~^H H_SR^H,
///   C = R^H H_RR^H + S~ V~^H H_SR^H + sigma_R Q~.
CMat update_q(const PBsumState& state, const ChannelSet& ch, const SystemConfig& config, bool include_si = true);

/// Kronecker-vectorized solve of A X + X B = C (A, B Hermitian, A + B spectra disjoint from 0).
CMat solve_sylvester_kron(const CMat& a, const CMat& b, const CMat& c);

/// S = (rho I + H_RD^H U W U^H H_RD)^{-1} (rho S~ + H_RD^H U W).
CMat update_s(const PBsumState& state, const ChannelSet& ch);

/// V~ = (I + H_SR^H Q^H Q H_SR)^{-1} (V + H_SR^H Q^H S~).
CMat update_v_tilde(const PBsumState& state, const ChannelSet& ch);

PenaltyResidualBlocks residual_blocks(const PBsumState& state, const ChannelSet& ch, const SystemConfig& config,
                                      bool include_si = true);

/// E_rho = -log det W + trace(W E(U, S, Q)) - d + rho * sum of squared coupling
/// residuals, at the state's stored U and W. Equals penalized_objective right
/// after a receiver update.
double surrogate_merit(const PBsumState& state, const ChannelSet& ch, const SystemConfig& config,
                       bool include_si = true);

/// -R(S, Q) + rho * sum of squared coupling residuals.
double penalized_objective(const PBsumState& state, const ChannelSet& ch, const SystemConfig& config,
                           bool include_si = true);

/// One BSUM pass in the fixed order: receiver, (Q~, S~), V, R, Q, S, V~.
/// With check_blocks set, throws ContractViolation naming the block whose
/// update raised E_rho beyond the slack.
void inner_cycle(PBsumState& state, const ChannelSet& ch, const SystemConfig& config,
                 const FdPBsumOptions& opts = {});

/// Adapter exposing the relay problem to pbsum::solve. The stacked h(x)
/// carries a sqrt(2) factor so that (rho/2)||h||^2 equals the penalty term
/// rho * sum ||block||^2 exactly.
class FdRelayProblem {
 public:
  using State = PBsumState;

  FdRelayProblem(const ChannelSet& ch, const SystemConfig& config, FdPBsumOptions opts = {});

  double merit(const State& x, double rho) const;
  Eigen::VectorXd residuals(const State& x) const;
  void inner_cycle(State& x, double rho) const;

  const ChannelSet& channels() const { return ch_; }

 private:
  ChannelSet ch_;
  SystemConfig config_;
  FdPBsumOptions opts_;
};

struct FdSolveResult {
  PBsumState state;
  pbsum::SolveTrace trace;
  Precoders precoders;
  double rate = 0;           ///< model rate of the terminal (V, Q), nats
  double internal_rate = 0;  ///< R(S, Q) of the terminal iterate
  double residual_inf = 0;   ///< ||h||_inf at termination
  double si_residual = 0;    ///< max |Q H_RR Q|
  /// Rate after snapping Q to rank one, re-zero-forcing and rescaling to the
  /// relay budget; only for N_T = N_R <= 3.
  std::optional<double> polished_rate;
  bool converged = false;
};

FdSolveResult solve_fd_pbsum(const ChannelSet& ch, const SystemConfig& config, const pbsum::PenaltySchedule& sched,
                             std::uint64_t seed, const FdPBsumOptions& opts = {});

struct UpperBoundResult {
  Precoders precoders;
  double rate = 0;  ///< best no-SI rate found, nats
  double pbsum_rate = 0;
  int chosen_candidate = -1;  ///< -1: the no-SI penalty solve itself won
  FdSolveResult solve;
};

/// Rate without the zero-forcing SI constraint (relaxation upper bound):
/// penalty-BSUM with R and the SI penalties removed. Candidate designs that
/// are feasible for the relaxation (e.g. the constrained solutions of the
/// same trial) are also evaluated and the best value is returned.
UpperBoundResult solve_upper_bound_no_si(const ChannelSet& ch, const SystemConfig& config,
                                         const pbsum::PenaltySchedule& sched, std::uint64_t seed,
                                         const std::vector<Precoders>& candidates = {});

}  // namespace fdrelay
