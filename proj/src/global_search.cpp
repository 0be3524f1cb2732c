#include "fdrelay/global_search.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fdrelay/errors.hpp"

namespace fdrelay {

QuadRatioInstance quad_ratio_instance(const ChannelSet& ch, const SystemConfig& config, double lambda1) {
  const CMat hh = ch.h_sr * ch.h_sr.adjoint();
  const CMat gram_rd = ch.h_rd.adjoint() * ch.h_rd;
  QuadRatioInstance inst;
  inst.lambda1 = lambda1;
  inst.lambda1_tilde = gram_rd.trace().real() - lambda1;
  inst.a1 = lambda1 * config.p_s * hh;
  inst.a2 = config.sigma_d2 * (config.p_s / config.p_r) * hh;
  inst.a2.diagonal().array() += config.sigma_r2 * (lambda1 + config.sigma_d2 / config.p_r);
  CMat shifted = gram_rd;
  shifted.diagonal().array() -= inst.lambda1_tilde;
  inst.a3 = ch.h_rr * shifted * ch.h_rr.adjoint();
  inst.a3 = 0.5 * (inst.a3 + inst.a3.adjoint()).eval();
  return inst;
}

namespace {

double ratio(const CMat& a1, const CMat& a2, const CVec& x) {
  return x.dot(a1 * x).real() / x.dot(a2 * x).real();
}

}  // namespace

FixedLambdaSolution solve_fixed_lambda(const QuadRatioInstance& inst) {
  if (inst.a3.rows() != 2 || inst.a3.cols() != 2) throw DimensionError("solve_fixed_lambda: 2x2 instances only");
  FixedLambdaSolution out;
  Eigen::SelfAdjointEigenSolver<CMat> es(inst.a3);
  const auto& sig = es.eigenvalues();  // ascending
  const CMat& u = es.eigenvectors();
  const double scale = std::max(sig.cwiseAbs().maxCoeff(), 1e-300);
  const double zero_tol = 1e-12 * scale;

  // Semidefinite A3: the only feasible directions are null vectors.
  if (sig(0) >= -zero_tol || sig(1) <= zero_tol) {
    const Eigen::Index k = std::abs(sig(0)) <= std::abs(sig(1)) ? 0 : 1;
    if (std::abs(sig(k)) > zero_tol) {
      out.diagnostic = "A3 definite: no feasible direction";
      return out;
    }
    out.x_r = u.col(k);
    out.value = ratio(inst.a1, inst.a2, out.x_r);
    out.valid = true;
    return out;
  }

  out.mu1 = std::abs(sig(0));
  out.mu2 = std::abs(sig(1));
  if (out.mu2 <= zero_tol) {
    out.diagnostic = "mu2 = 0: skipped";
    return out;
  }
  const double r = out.mu1 / out.mu2;
  const double sr = std::sqrt(r);
  const CMat a = u.adjoint() * inst.a1 * u;
  const CMat b = u.adjoint() * inst.a2 * u;
  const double a_diag = a(0, 0).real() + r * a(1, 1).real();
  const double b_diag = b(0, 0).real() + r * b(1, 1).real();
  const double a_off = 2.0 * sr * std::abs(a(0, 1));
  const double b_off = 2.0 * sr * std::abs(b(0, 1));
  const double phi_plus = (a_diag + a_off) / (b_diag + b_off);
  const double phi_minus = (a_diag - a_off) / (b_diag - b_off);
  out.z = phi_plus >= phi_minus ? 1 : -1;
  out.value = std::max(phi_plus, phi_minus);

  const double angle = std::arg(a(0, 1)) + (out.z > 0 ? 0.0 : std::numbers::pi);
  CVec xt(2);
  xt << std::polar(1.0, angle), cdouble(sr, 0.0);
  out.x_r = u * xt;
  out.valid = true;
  return out;
}

Rank1Solution global_search_2x2(const ChannelSet& ch, const SystemConfig& config, const GlobalSearchOptions& opts,
                                GlobalSearchReport* report) {
  check_dimensions(ch, config);
  if (config.n_t != 2 || config.n_r != 2) throw DimensionError("global_search_2x2 requires n_t = n_r = 2");
  if (opts.grid_points < 3) throw std::invalid_argument("global_search_2x2: need at least 3 grid points");

  Eigen::SelfAdjointEigenSolver<CMat> es(ch.h_rd.adjoint() * ch.h_rd);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(1);
  const double trace = lo + hi;

  GlobalSearchReport local_report;
  GlobalSearchReport& rep = report ? *report : local_report;

  auto evaluate = [&](double lambda_tilde) {
    ++rep.evaluations;
    FixedLambdaSolution s = solve_fixed_lambda(quad_ratio_instance(ch, config, trace - lambda_tilde));
    if (!s.valid) {
      ++rep.skipped_points;
      if (rep.diagnostics.size() < 16) rep.diagnostics.push_back(s.diagnostic);
    }
    return s;
  };

  const int g = opts.grid_points;
  std::vector<double> grid(g), values(g, -1.0);
  for (int i = 0; i < g; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (g - 1);
    const FixedLambdaSolution s = evaluate(grid[i]);
    if (s.valid) values[i] = s.value;
  }

  std::vector<int> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });

  double best_t = grid[order[0]];
  double best_v = values[order[0]];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const int brackets = std::min(opts.refine_brackets, g);
  for (int k = 0; k < brackets; ++k) {
    const int i = order[k];
    if (values[i] < 0) break;
    double a = grid[std::max(i - 1, 0)];
    double b = grid[std::min(i + 1, g - 1)];
    auto f = [&](double t) {
      const FixedLambdaSolution s = evaluate(t);
      return s.valid ? s.value : -1.0;
    };
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > opts.refine_tol * std::max(1.0, hi)) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = f(d);
      }
    }
    const double t = fc >= fd ? c : d;
    const double v = std::max(fc, fd);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }

  const FixedLambdaSolution best = evaluate(best_t);
  rep.best_lambda1 = trace - best_t;
  rep.best_value = best.value;
  if (!best.valid) throw DegenerateError("global_search_2x2: no feasible grid point");
  Rank1Solution sol = recover_solution(best.x_r, ch, config);
  sol.iterations = rep.evaluations;
  return sol;
}

}  // namespace fdrelay
