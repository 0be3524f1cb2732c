#include "fdrelay/fd_pbsum.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>

#include "fdrelay/errors.hpp"
#include "fdrelay/random.hpp"

namespace fdrelay {

namespace {

CMat identity(Eigen::Index n) { return CMat::Identity(n, n); }

CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

CMat solve_hpd(const CMat& a, const CMat& b, const char* what) {
  Eigen::LLT<CMat> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) throw ContractViolation(std::string(what) + ": system is not positive definite");
  return llt.solve(b);
}

double inf_norm_of(const CMat& m) {
  if (m.size() == 0) return 0.0;
  return std::max(m.real().cwiseAbs().maxCoeff(), m.imag().cwiseAbs().maxCoeff());
}

// H_RD^H U W U^H H_RD
CMat weighted_gram(const PBsumState& st, const CMat& h_rd) {
  const CMat hu = h_rd.adjoint() * st.u_bar;
  return hermitian_part(hu * st.w_bar * hu.adjoint());
}

}  // namespace

double PenaltyResidualBlocks::squared_norm() const {
  return q_scaled.squaredNorm() + s.squaredNorm() + v.squaredNorm() + rq.squaredNorm() + loop.squaredNorm() +
         relay.squaredNorm();
}

double PenaltyResidualBlocks::inf_norm() const {
  return std::max({inf_norm_of(q_scaled), inf_norm_of(s), inf_norm_of(v), inf_norm_of(rq), inf_norm_of(loop),
                   inf_norm_of(relay)});
}

PBsumState init_state(const ChannelSet& ch, const SystemConfig& config, std::uint64_t seed, bool include_si) {
  config.validate();
  check_dimensions(ch, config);
  Rng rng(seed);
  Rng v_rng = rng.fork(1);
  Rng q_rng = rng.fork(2);
  PBsumState st;
  const CMat u = random_unitary(config.n_s, v_rng);
  st.v = std::sqrt(config.p_s / config.d) * u.leftCols(config.d);
  st.q = q_rng.complex_gaussian(config.n_t, config.n_r, 1.0);
  const double power = relay_power({st.v, st.q}, ch, config);
  st.q *= std::sqrt(0.9 * config.p_r / power);
  st.s = st.q * ch.h_sr * st.v;
  st.s_tilde = st.s;
  st.q_tilde = std::sqrt(config.sigma_r2) * st.q;
  st.v_tilde = st.v;
  st.r = include_si ? update_r(st, ch) : CMat::Zero(config.n_t, config.n_t);
  const ReceiverUpdate rx = update_receiver(st, ch, config);
  st.u_bar = rx.u_bar;
  st.w_bar = rx.w_bar;
  return st;
}

ReceiverUpdate update_receiver(const PBsumState& st, const ChannelSet& ch, const SystemConfig& config) {
  const CMat hq = ch.h_rd * st.q;
  const CMat hs = ch.h_rd * st.s;
  CMat j = config.sigma_r2 * (hq * hq.adjoint()) + hs * hs.adjoint();
  j.diagonal().array() += config.sigma_d2;
  ReceiverUpdate out;
  out.u_bar = solve_hpd(j, hs, "receiver update");
  const CMat m = identity(st.s.cols()) - out.u_bar.adjoint() * hs;
  out.w_bar = hermitian_part(solve_hpd(m, identity(m.rows()), "weight update"));
  return out;
}

CMat mse_matrix(const CMat& u, const CMat& s, const CMat& q, const CMat& h_rd, const SystemConfig& config) {
  const CMat e = identity(s.cols()) - u.adjoint() * h_rd * s;
  const CMat uhq = u.adjoint() * h_rd * q;
  return hermitian_part(e * e.adjoint() + config.sigma_r2 * (uhq * uhq.adjoint()) +
                        config.sigma_d2 * (u.adjoint() * u));
}

std::pair<CMat, CMat> project_omega1(const CMat& q_target, const CMat& s_target, double p_r) {
  const double r = std::sqrt(p_r);
  const double norm = std::sqrt(q_target.squaredNorm() + s_target.squaredNorm());
  const double scale = r / (norm + std::max(0.0, r - norm));
  return {scale * q_target, scale * s_target};
}

std::pair<CMat, CMat> minimize_omega1(const CMat& q_target, const CMat& s_target, double p_r, double s_weight) {
  const double a2 = q_target.squaredNorm();
  const double b2 = s_target.squaredNorm();
  if (a2 + b2 <= p_r) return {q_target, s_target};
  const double w = s_weight;
  auto power = [&](double mu) { return a2 / ((1 + mu) * (1 + mu)) + w * w * b2 / ((w + mu) * (w + mu)); };
  double lo = 0.0;
  double hi = std::max(0.0, std::sqrt((a2 + w * w * b2) / p_r) - std::min(1.0, w));
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (power(mid) > p_r ? lo : hi) = mid;
  }
  CMat q = q_target / (1 + hi);
  CMat s = (w / (w + hi)) * s_target;
  const double got = q.squaredNorm() + s.squaredNorm();
  if (got > p_r) {
    const double k = std::sqrt(p_r / got);
    q *= k;
    s *= k;
  }
  return {q, s};
}

CMat project_omega2(const CMat& v_tilde, double p_s) {
  const double r = std::sqrt(p_s);
  const double norm = v_tilde.norm();
  return (r / (norm + std::max(0.0, r - norm))) * v_tilde;
}

CMat update_r(const PBsumState& st, const ChannelSet& ch) {
  CMat a = st.q * st.q.adjoint();
  a.diagonal().array() += 1.0;
  return solve_hpd(a, ch.h_rr.adjoint() * st.q.adjoint(), "R update");
}

CMat solve_sylvester_kron(const CMat& a, const CMat& b, const CMat& c) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = b.rows();
  CMat k = CMat::Zero(m * n, m * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * m, j * m, m, m) += a;
    for (Eigen::Index i = 0; i < n; ++i) k.block(i * m, j * m, m, m).diagonal().array() += b(j, i);
  }
  k = hermitian_part(k);
  const CVec rhs = Eigen::Map<const CVec>(c.data(), c.size());
  Eigen::LLT<CMat> llt(k);
  CVec x;
  if (llt.info() == Eigen::Success) {
    x = llt.solve(rhs);
  } else {
    std::cerr << "warning: Kronecker system not positive definite, regularizing by 1e-12\n";
    k.diagonal().array() += 1e-12;
    x = k.partialPivLu().solve(rhs);
  }
  return Eigen::Map<const CMat>(x.data(), m, n);
}

CMat update_q(const PBsumState& st, const ChannelSet& ch, const SystemConfig& config, bool include_si) {
  if (!(st.rho > 0)) throw ContractViolation("Q update needs rho > 0");
  const double sr = std::sqrt(config.sigma_r2);
  CMat a = (config.sigma_r2 / st.rho) * weighted_gram(st, ch.h_rd);
  a.diagonal().array() += config.sigma_r2;
  const CMat hv = ch.h_sr * st.v_tilde;
  CMat b = hv * hv.adjoint();
  CMat c = st.s_tilde * hv.adjoint() + sr * st.q_tilde;
  if (include_si) {
    a += st.r * st.r.adjoint();
    b += ch.h_rr * ch.h_rr.adjoint();
    c += st.r.adjoint() * ch.h_rr.adjoint();
  }
  return solve_sylvester_kron(hermitian_part(a), hermitian_part(b), c);
}

CMat update_s(const PBsumState& st, const ChannelSet& ch) {
  CMat a = weighted_gram(st, ch.h_rd);
  a.diagonal().array() += st.rho;
  const CMat rhs = st.rho * st.s_tilde + ch.h_rd.adjoint() * st.u_bar * st.w_bar;
  return solve_hpd(a, rhs, "S update");
}

CMat update_v_tilde(const PBsumState& st, const ChannelSet& ch) {
  const CMat qh = st.q * ch.h_sr;
  CMat a = qh.adjoint() * qh;
  a.diagonal().array() += 1.0;
  return solve_hpd(a, st.v + qh.adjoint() * st.s_tilde, "V~ update");
}

PenaltyResidualBlocks residual_blocks(const PBsumState& st, const ChannelSet& ch, const SystemConfig& config,
                                      bool include_si) {
  PenaltyResidualBlocks h;
  h.q_scaled = std::sqrt(config.sigma_r2) * st.q - st.q_tilde;
  h.s = st.s - st.s_tilde;
  h.v = st.v - st.v_tilde;
  if (include_si) {
    h.rq = st.r.adjoint() * st.q;
    h.loop = st.r.adjoint() - st.q * ch.h_rr;
  }
  h.relay = st.q * ch.h_sr * st.v_tilde - st.s_tilde;
  return h;
}

double surrogate_merit(const PBsumState& st, const ChannelSet& ch, const SystemConfig& config, bool include_si) {
  const CMat e = mse_matrix(st.u_bar, st.s, st.q, ch.h_rd, config);
  const double fit = (st.w_bar * e).trace().real() - log_det_hpd(st.w_bar) - static_cast<double>(st.s.cols());
  return fit + st.rho * residual_blocks(st, ch, config, include_si).squared_norm();
}

double penalized_objective(const PBsumState& st, const ChannelSet& ch, const SystemConfig& config,
                           bool include_si) {
  return -rate_sq(st.s, st.q, ch.h_rd, config) +
         st.rho * residual_blocks(st, ch, config, include_si).squared_norm();
}

void inner_cycle(PBsumState& st, const ChannelSet& ch, const SystemConfig& config, const FdPBsumOptions& opts) {
  const bool si = opts.include_si;
  double last = opts.check_blocks ? surrogate_merit(st, ch, config, si) : 0.0;
  auto check = [&](const char* block) {
    if (!opts.check_blocks) return;
    const double cur = surrogate_merit(st, ch, config, si);
    if (cur > last + opts.block_slack * std::max(1.0, std::abs(last))) {
      std::ostringstream msg;
      msg << "BSUM block '" << block << "' increased E_rho from " << last << " to " << cur << " at rho=" << st.rho;
      throw ContractViolation(msg.str());
    }
    last = cur;
  };

  const ReceiverUpdate rx = update_receiver(st, ch, config);
  st.u_bar = rx.u_bar;
  st.w_bar = rx.w_bar;
  check("receiver");

  const double sr = std::sqrt(config.sigma_r2);
  const CMat relayed = st.q * ch.h_sr * st.v_tilde;
  if (opts.omega1 == Omega1Rule::kExactWeighted) {
    std::tie(st.q_tilde, st.s_tilde) = minimize_omega1(sr * st.q, 0.5 * (st.s + relayed), config.p_r, 2.0);
  } else {
    std::tie(st.q_tilde, st.s_tilde) = project_omega1(sr * st.q, 0.5 * (st.s + relayed), config.p_r);
  }
  check("omega1");

  st.v = project_omega2(st.v_tilde, config.p_s);
  check("V");

  if (si) {
    st.r = update_r(st, ch);
    check("R");
  }

  st.q = update_q(st, ch, config, si);
  check("Q");

  st.s = update_s(st, ch);
  check("S");

  st.v_tilde = update_v_tilde(st, ch);
  check("V~");
}

FdRelayProblem::FdRelayProblem(const ChannelSet& ch, const SystemConfig& config, FdPBsumOptions opts)
    : ch_(ch), config_(config), opts_(opts) {
  config_.validate();
  check_dimensions(ch_, config_);
}

double FdRelayProblem::merit(const State& x, double rho) const {
  return -rate_sq(x.s, x.q, ch_.h_rd, config_) +
         rho * residual_blocks(x, ch_, config_, opts_.include_si).squared_norm();
}

Eigen::VectorXd FdRelayProblem::residuals(const State& x) const {
  const PenaltyResidualBlocks h = residual_blocks(x, ch_, config_, opts_.include_si);
  const CMat* blocks[] = {&h.q_scaled, &h.s, &h.v, &h.rq, &h.loop, &h.relay};
  Eigen::Index total = 0;
  for (const CMat* b : blocks) total += 2 * b->size();
  Eigen::VectorXd out(total);
  Eigen::Index k = 0;
  for (const CMat* b : blocks) {
    for (Eigen::Index i = 0; i < b->size(); ++i) {
      out(k++) = std::sqrt(2.0) * (*b)(i).real();
      out(k++) = std::sqrt(2.0) * (*b)(i).imag();
    }
  }
  return out;
}

void FdRelayProblem::inner_cycle(State& x, double rho) const {
  x.rho = rho;
  fdrelay::inner_cycle(x, ch_, config_, opts_);
}

namespace {

std::optional<double> polished_rate(const PBsumState& st, const ChannelSet& ch, const SystemConfig& config) {
  if (config.n_t != config.n_r || config.n_t > 3) return std::nullopt;
  Eigen::JacobiSVD<CMat> svd(st.q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!(svd.singularValues()(0) > 0)) return std::nullopt;
  const CVec x_r = svd.singularValues()(0) * svd.matrixV().col(0);
  CVec x_t = svd.matrixU().col(0);
  const CVec g = ch.h_rr.adjoint() * x_r;
  if (g.norm() < 1e-12) return std::nullopt;
  x_t -= g * (g.dot(x_t) / g.squaredNorm());
  if (x_t.norm() < 1e-12) return std::nullopt;
  x_t.normalize();
  Precoders p{st.v, x_t * x_r.adjoint()};
  const double power = relay_power(p, ch, config);
  if (!(power > 0)) return std::nullopt;
  p.q *= std::sqrt(config.p_r / power);
  return rate(p, ch, config);
}

}  // namespace

FdSolveResult solve_fd_pbsum(const ChannelSet& ch, const SystemConfig& config, const pbsum::PenaltySchedule& sched,
                             std::uint64_t seed, const FdPBsumOptions& opts) {
  FdRelayProblem problem(ch, config, opts);
  FdSolveResult out;
  out.state = init_state(ch, config, seed, opts.include_si);
  out.state.rho = sched.rho0;
  out.trace = pbsum::solve(problem, out.state, sched);
  out.precoders = {out.state.v, out.state.q};
  out.rate = rate(out.precoders, ch, config);
  out.internal_rate = rate_sq(out.state.s, out.state.q, ch.h_rd, config);
  out.residual_inf = pbsum::residual_inf(problem, out.state);
  out.si_residual = si_residual_inf(out.state.q, ch.h_rr);
  if (opts.include_si) out.polished_rate = polished_rate(out.state, ch, config);
  out.converged = out.trace.reason == pbsum::Termination::kFeasible;
  return out;
}

UpperBoundResult solve_upper_bound_no_si(const ChannelSet& ch, const SystemConfig& config,
                                         const pbsum::PenaltySchedule& sched, std::uint64_t seed,
                                         const std::vector<Precoders>& candidates) {
  FdPBsumOptions opts;
  opts.include_si = false;
  UpperBoundResult out;
  out.solve = solve_fd_pbsum(ch, config, sched, seed, opts);
  out.precoders = out.solve.precoders;
  out.pbsum_rate = out.solve.rate;
  out.rate = out.pbsum_rate;
  constexpr double kPowerTol = 1e-4;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Precoders& c = candidates[i];
    if (source_power(c) > config.p_s * (1 + kPowerTol) || relay_power(c, ch, config) > config.p_r * (1 + kPowerTol)) {
      continue;
    }
    const double r = rate(c, ch, config);
    if (r > out.rate) {
      out.rate = r;
      out.precoders = c;
      out.chosen_candidate = static_cast<int>(i);
    }
  }
  return out;
}

}  // namespace fdrelay
