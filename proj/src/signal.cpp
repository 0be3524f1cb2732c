#include "fdrelay/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdrelay/errors.hpp"
#include "fdrelay/kernels.hpp"
#include "fdrelay/random.hpp"

namespace fdrelay {

namespace {

double spectral_radius(const CMat& m) {
  Eigen::ComplexEigenSolver<CMat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

DestinationCovariances closed_form_covariances(const Precoders& p, const ChannelSet& ch, const SystemConfig& config) {
  check_dimensions(p, ch, config);
  const CMat hs = ch.h_rd * p.q * ch.h_sr * p.v;
  const CMat hq = ch.h_rd * p.q;
  DestinationCovariances c;
  c.useful = hs * hs.adjoint();
  c.interference_noise = config.sigma_r2 * (hq * hq.adjoint());
  c.interference_noise.diagonal().array() += config.sigma_d2;
  return c;
}

LinkMeasurement simulate_link(const Precoders& p, const ChannelSet& ch, const SystemConfig& config,
                              Eigen::Index length, std::uint64_t seed) {
  check_dimensions(p, ch, config);
  if (length < 10000) throw std::invalid_argument("simulate_link: length must be >= 1e4 symbols");

  LinkMeasurement out;
  const CMat loop = p.q * ch.h_rr;
  out.loop_spectral_radius = spectral_radius(loop);
  if (out.loop_spectral_radius >= 1.0) {
    std::ostringstream msg;
    msg << "simulate_link: relay loop Q H_RR is unstable (spectral radius " << out.loop_spectral_radius << ")";
    throw ContractViolation(msg.str());
  }

  const Eigen::Index n_r = config.n_r, n_t = config.n_t, n_d = config.n_d;
  const Eigen::Index d = p.v.cols();
  const Eigen::Index tau = config.tau;

  Rng root(seed);
  Rng sym_rng = root.fork(1), relay_rng = root.fork(2), dest_rng = root.fork(3);

  SignalFrame& f = out.frame;
  f.tau = config.tau;
  f.s = sym_rng.complex_gaussian(d, length, 1.0);
  f.noise_r = relay_rng.complex_gaussian(n_r, length, config.sigma_r2);
  f.noise_d = dest_rng.complex_gaussian(n_d, length, config.sigma_d2);

  // r[n] without the loop-back term: H_SR V s[n] + n_R[n].
  const CMat hv = ch.h_sr * p.v;
  f.r = f.noise_r;
  kernels::gemm_accumulate(hv, f.s, f.r);

  f.x_r = CMat::Zero(n_t, length);
  // x_R on [n, n + tau) only reads r on [n - tau, n), so blocks of tau
  // columns can be advanced together.
  for (Eigen::Index n = tau; n < length; n += tau) {
    const Eigen::Index w = std::min(tau, length - n);
    auto xr_block = f.x_r.middleCols(n, w);
    CMat x_block = CMat::Zero(n_t, w);
    kernels::gemm_accumulate(p.q, CMat(f.r.middleCols(n - tau, w)), x_block);
    xr_block = x_block;
    CMat r_block = f.r.middleCols(n, w);
    kernels::gemm_accumulate(ch.h_rr, x_block, r_block);
    f.r.middleCols(n, w) = r_block;
  }

  f.y_d = f.noise_d;
  kernels::gemm_accumulate(ch.h_rd, f.x_r, f.y_d);

  // Exclude the start-up transient; exact under zero-forcing after 2 tau.
  out.warmup = std::max<Eigen::Index>(2 * tau, std::min<Eigen::Index>(length / 10, 32 * tau));
  if (out.warmup >= length) throw std::invalid_argument("simulate_link: tau too large for the frame length");
  const Eigen::Index m = length - out.warmup;
  const Eigen::Index first = out.warmup;

  const CMat g = ch.h_rd * p.q * hv;  // n_d x d
  CMat useful = CMat::Zero(n_d, m);
  kernels::gemm_accumulate(g, CMat(f.s.middleCols(first - tau, m)), useful);
  const CMat rest = f.y_d.middleCols(first, m) - useful;

  out.measured.useful = kernels::gram(useful) / static_cast<double>(m);
  out.measured.interference_noise = kernels::gram(rest) / static_cast<double>(m);

  out.empirical_rate = std::max(
      0.0, log_det_hpd(out.measured.interference_noise + out.measured.useful) - log_det_hpd(out.measured.interference_noise));
  out.empirical_sinr = std::expm1(out.empirical_rate);
  return out;
}

}  // namespace fdrelay
