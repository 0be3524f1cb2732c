#include <doctest.h>

#include "fdrelay/errors.hpp"
#include "fdrelay/global_search.hpp"
#include "oracles.hpp"

using namespace fdrelay;

TEST_CASE("closed-form fixed-lambda value matches a sweep of the feasible set") {
  const SystemConfig cfg = symmetric_config(2, 1, 10);
  int compared = 0;
  for (int s = 0; s < 20; ++s) {
    const ChannelSet ch = generate_channels(cfg, 200 + s);
    Eigen::SelfAdjointEigenSolver<CMat> es(ch.h_rd.adjoint() * ch.h_rd);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
    for (double t : {0.1, 0.37, 0.5, 0.81}) {
      const double tilde = lo + t * (hi - lo);
      const QuadRatioInstance inst = quad_ratio_instance(ch, cfg, lo + hi - tilde);
      const FixedLambdaSolution sol = solve_fixed_lambda(inst);
      const double brute = oracle::brute_force_ratio_2x2(inst.a1, inst.a2, inst.a3);
      if (brute < 0) {
        CHECK_FALSE(sol.valid);
        continue;
      }
      REQUIRE(sol.valid);
      CHECK(sol.value == doctest::Approx(brute).epsilon(1e-5));
      CHECK(sol.value >= brute * (1 - 1e-12));
      const CVec& x = sol.x_r;
      const double scale = inst.a3.norm() * x.squaredNorm();
      CHECK(std::abs(x.dot(inst.a3 * x)) <= 1e-10 * scale);
      ++compared;
    }
  }
  CHECK(compared > 40);
}

TEST_CASE("semidefinite constraint matrix branch") {
  QuadRatioInstance inst;
  inst.a1 = CMat::Identity(2, 2);
  inst.a1(0, 0) = 3.0;
  inst.a2 = CMat::Identity(2, 2);
  inst.a3 = CMat::Zero(2, 2);
  inst.a3(0, 0) = 1.0;
  const FixedLambdaSolution singular = solve_fixed_lambda(inst);
  REQUIRE(singular.valid);
  CHECK(singular.value == doctest::Approx(1.0));
  CHECK(singular.z == 0);

  inst.a3(1, 1) = 2.0;
  CHECK_FALSE(solve_fixed_lambda(inst).valid);
}

TEST_CASE("global search dominates gradient ascent on 2x2 relays") {
  const SystemConfig cfg = symmetric_config(2, 1, 10);
  for (int s = 0; s < 10; ++s) {
    const ChannelSet ch = generate_channels(cfg, 300 + s);
    GlobalSearchReport rep;
    const Rank1Solution g = global_search_2x2(ch, cfg, {}, &rep);
    GradientOptions go;
    go.seed = 400 + s;
    const Rank1Solution a = gradient_ascent(ch, cfg, go);
    CHECK(g.achieved_sinr >= a.achieved_sinr * (1 - 1e-6));
    CHECK(g.achieved_sinr == doctest::Approx(rep.best_value).epsilon(1e-9));
    CHECK(g.iterations == rep.evaluations);
    CHECK(std::abs(relay_power(g.precoders(), ch, cfg) - cfg.p_r) <= 1e-9 * cfg.p_r);

    // a gradient run started at the global optimum does not move away from it
    go.initial = g.x_r;
    go.starts = 1;
    CHECK(gradient_ascent(ch, cfg, go).achieved_sinr == doctest::Approx(g.achieved_sinr).epsilon(1e-6));
  }
}

TEST_CASE("global search tolerates a loop channel that makes grid points infeasible") {
  const SystemConfig cfg = symmetric_config(2, 1, 10);
  ChannelSet ch = generate_channels(cfg, 500);
  ch.h_rr = CMat::Zero(2, 2);
  ch.h_rr(0, 0) = 0.1;
  GlobalSearchReport rep;
  const Rank1Solution g = global_search_2x2(ch, cfg, {}, &rep);
  CHECK(std::isfinite(g.achieved_sinr));
  CHECK(g.achieved_sinr > 0);
}

TEST_CASE("global search requires a 2x2 relay") {
  const SystemConfig cfg = symmetric_config(3, 1, 10);
  const ChannelSet ch = generate_channels(cfg, 1);
  CHECK_THROWS_AS(global_search_2x2(ch, cfg), DimensionError);
}
