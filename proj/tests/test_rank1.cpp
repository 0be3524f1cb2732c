#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fdrelay/errors.hpp"
#include "fdrelay/random.hpp"
#include "fdrelay/rank1.hpp"
#include "oracles.hpp"

using namespace fdrelay;

namespace {

CVec e(int n, int i) {
  CVec v = CVec::Zero(n);
  v(i) = 1.0;
  return v;
}

double eig_lower(const CMat& h_rd, int k) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h_rd.adjoint() * h_rd);
  return es.eigenvalues()(es.eigenvalues().size() - 1 - k);
}

// Stacked-real gradient of x -> f(x) as (d/dRe + j d/dIm) by central differences.
CVec fd_vec(const std::function<double(const CVec&)>& f, const CVec& x) {
  return oracle::fd_gradient([&](const CMat& m) { return f(CVec(m)); }, CMat(x));
}

}  // namespace

TEST_CASE("projection onto the zero-forcing subspace") {
  const CMat pi = projection_pi(e(3, 0), CMat::Identity(3, 3));
  CMat expect = CMat::Identity(3, 3);
  expect(0, 0) = 0;
  CHECK((pi - expect).norm() <= 1e-15);

  Rng rng(1);
  for (int s = 0; s < 10; ++s) {
    const CMat h_rr = rng.complex_gaussian(3, 3, 0.01);
    const CVec x = rng.complex_gaussian_vector(3);
    const CMat p = projection_pi(x, h_rr);
    CHECK((p * p - p).norm() <= 1e-12);
    CHECK((p - p.adjoint()).norm() <= 1e-15);
    CHECK((p * (h_rr.adjoint() * x)).norm() <= 1e-12 * (h_rr.adjoint() * x).norm());
  }
  CHECK_THROWS_AS(projection_pi(CVec::Zero(3), CMat::Identity(3, 3)), DegenerateError);
}

TEST_CASE("largest eigenvalue of the projected relay-destination gram") {
  // identity channel with e1 projected out
  const TopEigenpair t = lambda_max(e(3, 0), CMat::Identity(3, 3), CMat::Identity(3, 3));
  CHECK(t.lambda == doctest::Approx(1.0));

  Rng rng(2);
  for (int s = 0; s < 10; ++s) {
    // two transmit antennas: trace formula
    const CMat h_rd = rng.complex_gaussian(3, 2), h_rr = rng.complex_gaussian(2, 2, 0.01);
    const CVec x = rng.complex_gaussian_vector(2);
    const CVec g = h_rr.adjoint() * x;
    const double expect = (h_rd.adjoint() * h_rd).trace().real() - (h_rd * g).squaredNorm() / g.squaredNorm();
    CHECK(lambda_max(x, h_rr, h_rd).lambda == doctest::Approx(expect).epsilon(1e-12));
  }
  for (int s = 0; s < 10; ++s) {
    const CMat h_rd = rng.complex_gaussian(4, 4), h_rr = rng.complex_gaussian(4, 4, 0.01);
    const CVec x = rng.complex_gaussian_vector(4);
    const TopEigenpair top = lambda_max(x, h_rr, h_rd);
    const auto [l1, l2] = oracle::top_two_eigs(h_rd * projection_pi(x, h_rr) * h_rd.adjoint());
    CHECK(std::abs(top.lambda - l1) <= 1e-8 * l1);
    CHECK(top.gap == doctest::Approx(l1 - l2).epsilon(1e-6));
    CHECK(top.lambda <= eig_lower(h_rd, 0) + 1e-9);
    CHECK(top.lambda >= eig_lower(h_rd, 1) - 1e-9);
    CHECK(std::abs(top.u1.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("eigenvalue gradient against finite differences") {
  Rng rng(3);
  int checked = 0;
  for (int s = 0; checked < 20 && s < 100; ++s) {
    const CMat h_rd = rng.complex_gaussian(4, 4), h_rr = rng.complex_gaussian(4, 4, 0.01);
    const CVec x = rng.complex_gaussian_vector(4);
    if (lambda_max(x, h_rr, h_rd).gap < 1e-3) continue;
    const CVec g = lambda_max_gradient(x, h_rr, h_rd);
    const CVec fd = fd_vec([&](const CVec& y) { return lambda_max(y, h_rr, h_rd).lambda; }, x);
    CHECK((2.0 * g - fd).norm() <= 1e-5 * fd.norm());
    // depends only on the direction of x: no first-order change along x or j x
    CHECK(std::abs(g.dot(x).real()) <= 1e-8 * g.norm() * x.norm());
    CHECK(std::abs(g.dot(cdouble(0, 1) * x).real()) <= 1e-8 * g.norm() * x.norm());
    const CVec g2 = lambda_max_gradient(2.0 * x, h_rr, h_rd);
    CHECK((g2 - 0.5 * g).norm() <= 1e-10 * g.norm());
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("eigenvalue gradient vanishes for an isotropic relay-destination channel") {
  Rng rng(4);
  const CMat h_rd = std::sqrt(2.0) * random_unitary(2, rng);
  const CMat h_rr = rng.complex_gaussian(2, 2, 0.01);
  const CVec x = rng.complex_gaussian_vector(2);
  CHECK(lambda_max_gradient(x, h_rr, h_rd).norm() <= 1e-6);
}

TEST_CASE("gradient refuses a repeated top eigenvalue") {
  const CMat h_rd = CMat::Identity(3, 3);
  CHECK_THROWS_AS(lambda_max_gradient(e(3, 0), CMat::Identity(3, 3), h_rd), DegenerateError);
}

TEST_CASE("objective scale invariance, degenerate inputs and agreement with recovery") {
  const SystemConfig cfg = symmetric_config(4, 1, 10);
  for (int s = 0; s < 10; ++s) {
    const ChannelSet ch = generate_channels(cfg, 10 + s);
    const CVec x = Rng(20 + s).complex_gaussian_vector(4);
    const double f = rank1_objective(x, ch, cfg);
    for (cdouble c : {cdouble(0.5), cdouble(2.0), std::polar(1.0, std::numbers::pi / 3)}) {
      CHECK(std::abs(rank1_objective(c * x, ch, cfg) - f) <= 1e-10 * f);
    }
    const Rank1Solution sol = recover_solution(x, ch, cfg);
    CHECK(std::abs(sol.achieved_sinr - f) <= 1e-8 * f);
  }
  ChannelSet ch = generate_channels(cfg, 30);
  CHECK_THROWS_AS(rank1_objective(CVec::Zero(4), ch, cfg), std::invalid_argument);
  ch.h_sr.setZero();
  CHECK(rank1_objective(e(4, 1), ch, cfg) == 0.0);
}

TEST_CASE("objective gradient against finite differences") {
  const SystemConfig cfg = symmetric_config(4, 1, 10);
  for (int s = 0; s < 10; ++s) {
    const ChannelSet ch = generate_channels(cfg, 40 + s);
    const CVec x = Rng(50 + s).complex_gaussian_vector(4);
    const ObjectiveGradient og = rank1_objective_gradient(x, ch, cfg);
    if (og.eig_gap < 1e-3) continue;
    const CVec fd = fd_vec([&](const CVec& y) { return rank1_objective(y, ch, cfg); }, x);
    CHECK((2.0 * og.gradient - fd).norm() <= 1e-5 * fd.norm());
    CHECK(og.value == doctest::Approx(rank1_objective(x, ch, cfg)).epsilon(1e-14));
  }
}

TEST_CASE("recovered rank-one designs meet both budgets and zero-force the loop") {
  SystemConfig cfg = symmetric_config(3, 2, 10);
  cfg.p_r = 7.0;
  for (int s = 0; s < 10; ++s) {
    const ChannelSet ch = generate_channels(cfg, 60 + s);
    const Rank1Solution sol = recover_solution(Rng(70 + s).complex_gaussian_vector(3), ch, cfg);
    CHECK(std::abs(sol.x_t.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(source_power(sol.precoders()) - cfg.p_s) <= 1e-9 * cfg.p_s);
    CHECK(std::abs(relay_power(sol.precoders(), ch, cfg) - cfg.p_r) <= 1e-9 * cfg.p_r);
    CHECK(std::abs(sol.x_r.dot(ch.h_rr * sol.x_t)) <= 1e-9 * ch.h_rr.norm());
    CHECK(sol.v.col(1).norm() == 0.0);
  }
}

TEST_CASE("gradient ascent is monotone and returns its best start") {
  const SystemConfig cfg = symmetric_config(4, 1, 10);
  for (int s = 0; s < 5; ++s) {
    const ChannelSet ch = generate_channels(cfg, 80 + s);
    GradientOptions opts;
    opts.seed = 90 + s;
    AscentTrace trace;
    const Rank1Solution sol = gradient_ascent(ch, cfg, opts, &trace);
    REQUIRE(trace.objective.size() == 5);
    double best = 0;
    for (const auto& h : trace.objective) {
      for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] >= h[i - 1] - 1e-12 * h[i - 1]);
      best = std::max(best, h.back());
    }
    CHECK(sol.achieved_sinr == doctest::Approx(best).epsilon(1e-8));
    CHECK(sol.achieved_sinr <= rank1_without_si(ch, cfg).achieved_sinr * (1 + 1e-9));
  }
}

TEST_CASE("low-complexity designs zero-force the loop") {
  const SystemConfig cfg = symmetric_config(4, 1, 10);
  for (int s = 0; s < 10; ++s) {
    const ChannelSet ch = generate_channels(cfg, 100 + s);
    for (const Rank1Solution& sol : {tzf(ch, cfg), rzf(ch, cfg)}) {
      CHECK(std::abs(sol.x_r.dot(ch.h_rr * sol.x_t)) <= 1e-9);
      CHECK(std::abs(relay_power(sol.precoders(), ch, cfg) - cfg.p_r) <= 1e-9 * cfg.p_r);
    }
  }
}

TEST_CASE("without a loop channel the low-complexity designs reach the unconstrained optimum") {
  const SystemConfig cfg = symmetric_config(4, 1, 10);
  for (int s = 0; s < 5; ++s) {
    ChannelSet ch = generate_channels(cfg, 110 + s);
    const double constrained = tzf(ch, cfg).achieved_sinr;
    // zero forcing only depends on the direction of H_RR
    ChannelSet scaled = ch;
    scaled.h_rr *= 1e-3;
    CHECK(tzf(scaled, cfg).achieved_sinr == doctest::Approx(constrained).epsilon(1e-9));
    ch.h_rr.setZero();
    const double free = rank1_without_si(ch, cfg).achieved_sinr;
    CHECK(tzf(ch, cfg).achieved_sinr == doctest::Approx(free).epsilon(1e-12));
    CHECK(rzf(ch, cfg).achieved_sinr == doctest::Approx(free).epsilon(1e-12));
    CHECK(free >= constrained);
  }
}
