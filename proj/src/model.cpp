#include "fdrelay/model.hpp"

#include <string>

#include "fdrelay/errors.hpp"
#include "fdrelay/random.hpp"

namespace fdrelay {

namespace {

std::string shape(const CMat& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void expect_shape(const CMat& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " is " + shape(m) + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

}  // namespace

ChannelSet generate_channels(const SystemConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  ChannelSet ch;
  ch.h_sr = rng.complex_gaussian(config.n_r, config.n_s, 1.0);
  ch.h_rd = rng.complex_gaussian(config.n_d, config.n_t, 1.0);
  ch.h_rr = rng.complex_gaussian(config.n_r, config.n_t, config.sigma_rr2);
  return ch;
}

void check_dimensions(const ChannelSet& ch, const SystemConfig& config) {
  expect_shape(ch.h_sr, config.n_r, config.n_s, "H_SR");
  expect_shape(ch.h_rd, config.n_d, config.n_t, "H_RD");
  expect_shape(ch.h_rr, config.n_r, config.n_t, "H_RR");
}

void check_dimensions(const Precoders& p, const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(ch, config);
  if (p.v.rows() != config.n_s || p.v.cols() < 1) {
    throw DimensionError("V is " + shape(p.v) + ", expected " + std::to_string(config.n_s) + " rows");
  }
  expect_shape(p.q, config.n_t, config.n_r, "Q");
}

double log_det_hpd(const CMat& a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) throw ContractViolation("log_det_hpd: matrix is not positive definite");
  const auto& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

double rate_sq(const CMat& s, const CMat& q, const CMat& h_rd, const SystemConfig& config) {
  const CMat hs = h_rd * s;
  const CMat hq = h_rd * q;
  CMat noise = config.sigma_r2 * (hq * hq.adjoint());
  noise.diagonal().array() += config.sigma_d2;
  const CMat total = noise + hs * hs.adjoint();
  // det(I + A C^{-1}) = det(C + A) / det(C)
  return std::max(0.0, log_det_hpd(total) - log_det_hpd(noise));
}

double rate(const Precoders& p, const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(p, ch, config);
  return rate_sq(p.q * ch.h_sr * p.v, p.q, ch.h_rd, config);
}

double relay_power(const Precoders& p, const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(p, ch, config);
  return (p.q * ch.h_sr * p.v).squaredNorm() + config.sigma_r2 * p.q.squaredNorm();
}

double source_power(const Precoders& p) { return p.v.squaredNorm(); }

double si_residual_inf(const CMat& q, const CMat& h_rr) {
  const CMat loop = q * h_rr * q;
  return loop.size() == 0 ? 0.0 : loop.cwiseAbs().maxCoeff();
}

FeasibilityReport feasibility_report(const Precoders& p, const ChannelSet& ch, const SystemConfig& config,
                                     double tol_power, double tol_si) {
  FeasibilityReport r;
  r.source_power = source_power(p);
  r.relay_power = relay_power(p, ch, config);
  r.si_residual_inf = si_residual_inf(p.q, ch.h_rr);
  r.source_ok = r.source_power <= config.p_s * (1.0 + tol_power);
  r.relay_ok = r.relay_power <= config.p_r * (1.0 + tol_power);
  r.si_ok = r.si_residual_inf <= tol_si;
  return r;
}

}  // namespace fdrelay
