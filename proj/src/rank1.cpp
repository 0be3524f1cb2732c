#include "fdrelay/rank1.hpp"

#include <cmath>
#include <limits>

#include "fdrelay/errors.hpp"
#include "fdrelay/random.hpp"

namespace fdrelay {

namespace {

constexpr double kDegenerateNorm = 1e-12;

}  // namespace

CVec top_eigenvector(const CMat& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian);
  if (es.info() != Eigen::Success) throw DegenerateError("top_eigenvector: eigensolver failed");
  return es.eigenvectors().col(hermitian.rows() - 1);
}

CMat projection_pi(const CVec& x_r, const CMat& h_rr) {
  const CVec g = h_rr.adjoint() * x_r;
  const double gn2 = g.squaredNorm();
  if (std::sqrt(gn2) < kDegenerateNorm) {
    throw DegenerateError("projection_pi: H_RR^H x_r vanishes; perturb x_r");
  }
  CMat pi = -(g * g.adjoint()) / gn2;
  pi.diagonal().array() += 1.0;
  return pi;
}

TopEigenpair lambda_max(const CVec& x_r, const CMat& h_rr, const CMat& h_rd) {
  const CMat pi = projection_pi(x_r, h_rr);
  CMat m = h_rd * pi * h_rd.adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  if (es.info() != Eigen::Success) throw DegenerateError("lambda_max: eigensolver failed");
  const Eigen::Index n = m.rows();
  TopEigenpair top;
  top.lambda = es.eigenvalues()(n - 1);
  top.u1 = es.eigenvectors().col(n - 1);
  top.gap = n > 1 ? top.lambda - es.eigenvalues()(n - 2) : std::numeric_limits<double>::infinity();
  return top;
}

namespace {

CVec lambda_gradient_from(const TopEigenpair& top, const CVec& x_r, const CMat& h_rr, const CMat& h_rd) {
  const CVec g = h_rr.adjoint() * x_r;
  const double gn2 = g.squaredNorm();
  const CVec w = h_rr * (h_rd.adjoint() * top.u1);  // H_RR H_RD^H u1
  const cdouble proj = top.u1.dot(h_rd * g);         // u1^H H_RD g
  return -(w * proj) / gn2 + (std::norm(proj) / (gn2 * gn2)) * (h_rr * g);
}

}  // namespace

CVec lambda_max_gradient(const CVec& x_r, const CMat& h_rr, const CMat& h_rd, double min_gap) {
  const TopEigenpair top = lambda_max(x_r, h_rr, h_rd);
  if (top.gap < min_gap) {
    throw DegenerateError("lambda_max_gradient: top eigenvalue is not simple; perturb x_r");
  }
  return lambda_gradient_from(top, x_r, h_rr, h_rd);
}

double rank1_objective(const CVec& x_r, const ChannelSet& ch, const SystemConfig& config) {
  const double n = x_r.squaredNorm();
  if (n == 0.0) throw std::invalid_argument("rank1_objective: x_r must be nonzero");
  const double a = (ch.h_sr.adjoint() * x_r).squaredNorm();
  if (a == 0.0) return 0.0;
  const double lam = lambda_max(x_r, ch.h_rr, ch.h_rd).lambda;
  const double kappa = config.sigma_d2 / config.p_r;
  return config.p_s * a * lam / (config.sigma_r2 * n * lam + kappa * (config.p_s * a + config.sigma_r2 * n));
}

ObjectiveGradient rank1_objective_gradient(const CVec& x_r, const ChannelSet& ch, const SystemConfig& config,
                                           double min_gap) {
  const double n = x_r.squaredNorm();
  if (n == 0.0) throw std::invalid_argument("rank1_objective_gradient: x_r must be nonzero");
  const TopEigenpair top = lambda_max(x_r, ch.h_rr, ch.h_rd);
  if (top.gap < min_gap) {
    throw DegenerateError("rank1_objective_gradient: top eigenvalue is not simple; perturb x_r");
  }
  const CVec hx = ch.h_sr.adjoint() * x_r;
  const double a = hx.squaredNorm();
  const CVec da = ch.h_sr * hx;
  const CVec& dn = x_r;
  const double lam = top.lambda;
  const CVec dlam = lambda_gradient_from(top, x_r, ch.h_rr, ch.h_rd);

  const double ps = config.p_s, sr2 = config.sigma_r2, kappa = config.sigma_d2 / config.p_r;
  const double num = ps * a * lam;
  const double den = sr2 * n * lam + kappa * (ps * a + sr2 * n);
  const CVec dnum = ps * (lam * da + a * dlam);
  const CVec dden = sr2 * (lam * dn + n * dlam) + kappa * (ps * da + sr2 * dn);

  ObjectiveGradient out;
  out.value = num / den;
  out.gradient = (dnum * den - num * dden) / (den * den);
  out.eig_gap = top.gap;
  return out;
}

Rank1Solution assemble_rank1(const CVec& x_t, const CVec& x_r_direction, const ChannelSet& ch,
                             const SystemConfig& config) {
  const CVec hx = ch.h_sr.adjoint() * x_r_direction;
  const double hx_norm = hx.norm();
  if (hx_norm < kDegenerateNorm) throw DegenerateError("assemble_rank1: H_SR^H x_r vanishes");
  Rank1Solution sol;
  sol.x_t = x_t.normalized();
  sol.v = CMat::Zero(config.n_s, config.d);
  sol.v.col(0) = std::sqrt(config.p_s) * hx / hx_norm;
  const double denom = config.p_s * hx.squaredNorm() + config.sigma_r2 * x_r_direction.squaredNorm();
  sol.x_r = std::sqrt(config.p_r / denom) * x_r_direction;
  sol.achieved_rate = rate(sol.precoders(), ch, config);
  sol.achieved_sinr = std::expm1(sol.achieved_rate);
  return sol;
}

Rank1Solution recover_solution(const CVec& x_r, const ChannelSet& ch, const SystemConfig& config) {
  if (x_r.squaredNorm() == 0.0) throw std::invalid_argument("recover_solution: x_r must be nonzero");
  // x_r sees no loop-back at all: any transmit direction is zero-forcing
  if ((ch.h_rr.adjoint() * x_r).norm() < kDegenerateNorm * x_r.norm()) {
    return assemble_rank1(top_eigenvector(ch.h_rd.adjoint() * ch.h_rd), x_r, ch, config);
  }
  const CMat pi = projection_pi(x_r, ch.h_rr);
  CMat m = pi * ch.h_rd.adjoint() * ch.h_rd * pi;
  m = 0.5 * (m + m.adjoint()).eval();
  // Re-apply Pi so the zero-forcing condition holds to rounding.
  const CVec x_t = (pi * top_eigenvector(m)).normalized();
  return assemble_rank1(x_t, x_r, ch, config);
}

Rank1Solution tzf(const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(ch, config);
  const CVec x_r = top_eigenvector(ch.h_sr * ch.h_sr.adjoint());
  return recover_solution(x_r, ch, config);
}

Rank1Solution rzf(const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(ch, config);
  const CVec x_t = top_eigenvector(ch.h_rd.adjoint() * ch.h_rd);
  const CVec h = ch.h_rr * x_t;
  CMat pi_r = CMat::Identity(config.n_r, config.n_r);
  if (h.norm() >= kDegenerateNorm) pi_r -= (h * h.adjoint()) / h.squaredNorm();
  CMat m = pi_r * ch.h_sr * ch.h_sr.adjoint() * pi_r;
  m = 0.5 * (m + m.adjoint()).eval();
  const CVec x_r = (pi_r * top_eigenvector(m)).normalized();
  return assemble_rank1(x_t, x_r, ch, config);
}

Rank1Solution rank1_without_si(const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(ch, config);
  const CVec x_t = top_eigenvector(ch.h_rd.adjoint() * ch.h_rd);
  const CVec x_r = top_eigenvector(ch.h_sr * ch.h_sr.adjoint());
  return assemble_rank1(x_t, x_r, ch, config);
}

namespace {

struct StartResult {
  CVec x;
  double value = -1;
  int iterations = 0;
  bool converged = false;
};

// Evaluates the objective and gradient, nudging x off eigenvalue ties.
ObjectiveGradient evaluate_with_tie_break(CVec& x, const ChannelSet& ch, const SystemConfig& config, Rng& rng,
                                          int& perturbations) {
  for (int attempt = 0;; ++attempt) {
    try {
      return rank1_objective_gradient(x, ch, config);
    } catch (const DegenerateError&) {
      if (attempt >= 20) throw;
      x += 1e-6 * rng.complex_gaussian_vector(x.size()).normalized();
      x.normalize();
      ++perturbations;
    }
  }
}

StartResult ascend(CVec x, const ChannelSet& ch, const SystemConfig& config, const GradientOptions& opts, Rng& rng,
                   std::vector<double>* history, int& perturbations) {
  x.normalize();
  StartResult res;
  ObjectiveGradient cur = evaluate_with_tie_break(x, ch, config, rng, perturbations);
  if (history) history->push_back(cur.value);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double gnorm2 = cur.gradient.squaredNorm();
    if (std::sqrt(gnorm2) <= opts.grad_tol * std::max(1.0, cur.value)) {
      res.converged = true;
      break;
    }
    // Along the conjugate gradient the real directional derivative is 2||g||^2.
    double step = opts.initial_step;
    bool accepted = false;
    CVec candidate;
    double cand_value = 0;
    while (step > 1e-20) {
      candidate = x + step * cur.gradient;
      try {
        cand_value = rank1_objective(candidate, ch, config);
      } catch (const DegenerateError&) {
        cand_value = -std::numeric_limits<double>::infinity();
      }
      if (cand_value >= cur.value + opts.sufficient_increase * step * 2.0 * gnorm2) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) {
      res.converged = true;  // no ascent possible at machine precision
      break;
    }
    x = candidate.normalized();
    cur = evaluate_with_tie_break(x, ch, config, rng, perturbations);
    if (history) history->push_back(cur.value);
  }
  res.x = x;
  res.value = cur.value;
  res.iterations = it;
  return res;
}

}  // namespace

Rank1Solution gradient_ascent(const ChannelSet& ch, const SystemConfig& config, const GradientOptions& opts,
                              AscentTrace* trace) {
  check_dimensions(ch, config);
  Rng rng(opts.seed);
  std::vector<CVec> starts;
  if (opts.initial) starts.push_back(*opts.initial);
  for (int s = 0; s < opts.starts; ++s) starts.push_back(rng.complex_gaussian_vector(config.n_r).normalized());

  StartResult best;
  int total_iters = 0;
  int perturbations = 0;
  for (const CVec& x0 : starts) {
    std::vector<double> history;
    StartResult r = ascend(x0, ch, config, opts, rng, trace ? &history : nullptr, perturbations);
    total_iters += r.iterations;
    if (trace) {
      trace->objective.push_back(std::move(history));
      trace->iterations.push_back(r.iterations);
      trace->converged.push_back(r.converged);
    }
    if (r.value > best.value) best = std::move(r);
  }
  if (trace) trace->tie_perturbations = perturbations;

  Rank1Solution sol = recover_solution(best.x, ch, config);
  sol.iterations = total_iters;
  return sol;
}

}  // namespace fdrelay
