#include <doctest.h>

#include <cmath>
#include <string>

#include "fdrelay/errors.hpp"
#include "fdrelay/kernels.hpp"
#include "fdrelay/random.hpp"
#include "fdrelay/rank1.hpp"
#include "fdrelay/signal.hpp"

using namespace fdrelay;

namespace {

double rel_diff(const CMat& a, const CMat& b) { return (a - b).norm() / b.norm(); }

Rank1Solution feasible_rank1(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed) {
  return recover_solution(Rng(seed).complex_gaussian_vector(cfg.n_r), ch, cfg);
}

}  // namespace

TEST_CASE("silent relay leaves destination noise only") {
  SystemConfig cfg = symmetric_config(2, 1, 10);
  cfg.sigma_d2 = 0.8;
  const ChannelSet ch = generate_channels(cfg, 1);
  const Precoders p{CMat::Constant(2, 1, 1.0), CMat::Zero(2, 2)};
  const LinkMeasurement m = simulate_link(p, ch, cfg, 100000, 2);
  const CMat expect = 0.8 * CMat::Identity(2, 2);
  CHECK((m.measured.interference_noise - expect).cwiseAbs().maxCoeff() <= 0.05 * 0.8);
  CHECK(m.measured.useful.norm() == 0.0);
  CHECK(m.empirical_rate == 0.0);
}

TEST_CASE("symbols have unit per-stream variance") {
  const SystemConfig cfg = symmetric_config(3, 2, 10);
  const ChannelSet ch = generate_channels(cfg, 3);
  const Rank1Solution sol = feasible_rank1(symmetric_config(3, 1, 10), ch, 4);
  Precoders p{CMat::Zero(3, 2), sol.q()};
  p.v.col(0) = sol.v.col(0);
  const LinkMeasurement m = simulate_link(p, ch, cfg, 100000, 5);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const double var = m.frame.s.row(k).squaredNorm() / static_cast<double>(m.frame.length());
    CHECK(std::abs(var - 1.0) <= 0.05);
  }
}

TEST_CASE("empirical SINR of rank-one designs tracks the closed form") {
  for (int s = 0; s < 5; ++s) {
    const SystemConfig cfg = symmetric_config(3, 1, 10);
    const ChannelSet ch = generate_channels(cfg, 10 + s);
    const Rank1Solution sol = feasible_rank1(cfg, ch, 20 + s);
    const LinkMeasurement m = simulate_link(sol.precoders(), ch, cfg, 100000, 30 + s);
    CHECK(std::abs(m.empirical_sinr - sol.achieved_sinr) <= 0.05 * sol.achieved_sinr);
    const DestinationCovariances cf = closed_form_covariances(sol.precoders(), ch, cfg);
    CHECK(rel_diff(m.measured.useful, cf.useful) <= 0.05);
    CHECK(rel_diff(m.measured.interference_noise, cf.interference_noise) <= 0.05);
  }
}

TEST_CASE("relay delay does not change zero-forced covariances") {
  SystemConfig cfg = symmetric_config(3, 1, 10);
  const ChannelSet ch = generate_channels(cfg, 40);
  const Rank1Solution sol = feasible_rank1(cfg, ch, 41);
  cfg.tau = 1;
  const LinkMeasurement a = simulate_link(sol.precoders(), ch, cfg, 100000, 42);
  cfg.tau = 3;
  const LinkMeasurement b = simulate_link(sol.precoders(), ch, cfg, 100000, 42);
  CHECK(a.frame.tau == 1);
  CHECK(b.frame.tau == 3);
  CHECK(rel_diff(b.measured.useful, a.measured.useful) <= 0.05);
  CHECK(rel_diff(b.measured.interference_noise, a.measured.interference_noise) <= 0.05);
  CHECK(std::abs(b.empirical_sinr - a.empirical_sinr) <= 0.05 * a.empirical_sinr);
}

TEST_CASE("unstable loop is rejected with its spectral radius") {
  SystemConfig cfg = symmetric_config(2, 1, 10);
  ChannelSet ch = generate_channels(cfg, 50);
  ch.h_rr = CMat::Identity(2, 2);
  const Precoders p{CMat::Constant(2, 1, 1.0), 2.0 * CMat::Identity(2, 2)};
  try {
    simulate_link(p, ch, cfg, 10000, 1);
    FAIL("expected ContractViolation");
  } catch (const ContractViolation& e) {
    CHECK(std::string(e.what()).find("spectral radius 2") != std::string::npos);
  }
}

TEST_CASE("short frames are rejected") {
  const SystemConfig cfg = symmetric_config(2, 1, 10);
  const ChannelSet ch = generate_channels(cfg, 51);
  const Precoders p{CMat::Constant(2, 1, 1.0), CMat::Zero(2, 2)};
  CHECK_THROWS_AS(simulate_link(p, ch, cfg, 9999, 1), std::invalid_argument);
}

TEST_CASE("simulation is reproducible and identical across kernel variants") {
  const SystemConfig cfg = symmetric_config(4, 1, 10);
  const ChannelSet ch = generate_channels(cfg, 60);
  const Rank1Solution sol = feasible_rank1(cfg, ch, 61);
  const kernels::Isa before = kernels::active_isa();
  kernels::set_isa(kernels::Isa::kScalar);
  const LinkMeasurement a = simulate_link(sol.precoders(), ch, cfg, 20000, 62);
  kernels::set_isa(kernels::Isa::kAvx2);
  const LinkMeasurement b = simulate_link(sol.precoders(), ch, cfg, 20000, 62);
  kernels::set_isa(before);
  CHECK((a.frame.y_d - b.frame.y_d).cwiseAbs().maxCoeff() <= 1e-12 * a.frame.y_d.cwiseAbs().maxCoeff());
  CHECK(a.empirical_rate == doctest::Approx(b.empirical_rate).epsilon(1e-12));
}
