#pragma once

#include <cmath>
#include <concepts>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdrelay/errors.hpp"

namespace fdrelay::pbsum {

/// Outer penalty loop parameters: rho_k = rho0 c^k, eps_k = eps0 / c^k.
struct PenaltySchedule {
  double rho0 = 1e-3;
  double c = 2.0;
  double eps0 = 1e-3;
  double eps_outer = 1e-6;  ///< stop once ||h(x)||_inf <= eps_outer
  int max_outer = 60;
  int max_inner = 1000;
  double monotone_slack = 1e-9;  ///< relative slack for the non-increasing merit check

  void validate() const {
    if (!(c > 1.0)) throw ConfigError("penalty growth factor c must exceed 1");
    if (!(rho0 > 0) || !(eps0 > 0) || !(eps_outer > 0)) throw ConfigError("penalty tolerances must be positive");
    if (max_outer < 1 || max_inner < 1) throw ConfigError("iteration caps must be >= 1");
  }
};

/// A problem  min f(x) s.t. h(x) = 0, x in X  handled by the penalty loop.
///
/// - merit(x, rho) returns f_rho(x) = f(x) + (rho/2) ||h(x)||^2.
/// - residuals(x) returns h(x) stacked as real numbers.
/// - inner_cycle(x, rho) performs one full pass of block updates, each
///   minimizing a locally tight upper bound of f_rho, so f_rho never increases.
template <class P>
concept PenaltyProblem = requires(P& p, const P& cp, typename P::State& x, const typename P::State& cx, double rho) {
  { cp.merit(cx, rho) } -> std::convertible_to<double>;
  { cp.residuals(cx) } -> std::convertible_to<Eigen::VectorXd>;
  p.inner_cycle(x, rho);
};

enum class Termination { kFeasible, kMaxOuter };

inline const char* to_string(Termination t) { return t == Termination::kFeasible ? "feasible" : "max_outer"; }

struct OuterRecord {
  double rho = 0;
  double inner_tol = 0;
  int inner_iterations = 0;
  double residual_inf = 0;
  double multiplier_inf = 0;  ///< ||rho h(x)||_inf, the multiplier estimate
  double stationarity = -1;   ///< projected-gradient residual if the problem provides one
};

struct SolveTrace {
  /// merit[k][i]: f_rho after i inner cycles of outer step k (index 0 = entry value).
  std::vector<std::vector<double>> merit;
  std::vector<OuterRecord> outer;
  Termination reason = Termination::kMaxOuter;
  int total_inner = 0;
};

template <class P>
double residual_inf(const P& problem, const typename P::State& x) {
  const Eigen::VectorXd h = problem.residuals(x);
  return h.size() == 0 ? 0.0 : h.template lpNorm<Eigen::Infinity>();
}

/// Penalty-BSUM: repeat { run block updates at rho_k until the relative merit
/// change drops below eps_k (or max_inner cycles); rho_{k+1} = c rho_k;
/// eps_{k+1} = eps_k / c } until ||h(x)||_inf <= eps_outer or max_outer.
///
/// Throws ContractViolation if an inner cycle increases the merit beyond
/// monotone_slack * max(1, |f_rho|).
template <PenaltyProblem P>
SolveTrace solve(P& problem, typename P::State& x, const PenaltySchedule& sched) {
  sched.validate();
  SolveTrace trace;
  double eps = sched.eps0;
  for (int k = 0; k < sched.max_outer; ++k) {
    const double rho = sched.rho0 * std::pow(sched.c, k);
    std::vector<double> merits;
    double prev = problem.merit(x, rho);
    merits.push_back(prev);
    int inner = 0;
    while (inner < sched.max_inner) {
      problem.inner_cycle(x, rho);
      ++inner;
      const double cur = problem.merit(x, rho);
      merits.push_back(cur);
      if (cur > prev + sched.monotone_slack * std::max(1.0, std::abs(prev))) {
        std::ostringstream msg;
        msg << "penalty loop: merit increased from " << prev << " to " << cur << " in inner cycle " << inner
            << " at rho=" << rho;
        throw ContractViolation(msg.str());
      }
      const double change = std::abs(cur - prev) / std::max(std::abs(prev), 1e-300);
      prev = cur;
      if (change <= eps) break;
    }
    OuterRecord rec;
    rec.rho = rho;
    rec.inner_tol = eps;
    rec.inner_iterations = inner;
    rec.residual_inf = residual_inf(problem, x);
    rec.multiplier_inf = rho * rec.residual_inf;
    if constexpr (requires(const P& cp, const typename P::State& cx) { cp.stationarity(cx, rho); }) {
      rec.stationarity = problem.stationarity(x, rho);
    }
    trace.total_inner += inner;
    trace.merit.push_back(std::move(merits));
    trace.outer.push_back(rec);
    if (rec.residual_inf <= sched.eps_outer) {
      trace.reason = Termination::kFeasible;
      return trace;
    }
    eps /= sched.c;
  }
  trace.reason = Termination::kMaxOuter;
  return trace;
}

}  // namespace fdrelay::pbsum
