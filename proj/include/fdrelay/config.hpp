#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "fdrelay/errors.hpp"

namespace fdrelay {

/// Antenna counts, stream count, power budgets and noise levels of one
/// source -> full-duplex relay -> destination link. Powers are linear watts.
struct SystemConfig {
  int n_s = 2;  ///< source antennas
  int n_r = 2;  ///< relay receive antennas
  int n_t = 2;  ///< relay transmit antennas
  int n_d = 2;  ///< destination antennas
  int d = 1;    ///< streams
  double p_s = 10.0;
  double p_r = 10.0;
  double sigma_r2 = 1.0;
  double sigma_d2 = 1.0;
  int tau = 1;  ///< relay processing delay in symbols; only the simulator uses it
  double sigma_rr2 = 0.01;

  int max_streams() const { return std::min({n_s, n_r, n_t, n_d}); }

  /// Throws ConfigError describing the first violated invariant.
  void validate() const {
    if (n_s < 2 || n_r < 2 || n_t < 2 || n_d < 2) {
      throw ConfigError("antenna counts must all be >= 2");
    }
    if (d < 1 || d > max_streams()) {
      throw ConfigError("stream count d=" + std::to_string(d) + " outside [1, " +
                        std::to_string(max_streams()) + "]");
    }
    if (!(p_s > 0) || !(p_r > 0) || !(sigma_r2 > 0) || !(sigma_d2 > 0) || !(sigma_rr2 > 0)) {
      throw ConfigError("powers and noise variances must be positive");
    }
    if (tau < 1) throw ConfigError("tau must be >= 1");
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Sets P_S = P_R = P and sigma_R^2 = sigma_D^2 = sigma^2 with
/// SNR(dB) = 10 log10(P / sigma^2), keeping sigma^2 fixed.
inline void set_snr_db(SystemConfig& cfg, double snr_db, double noise_db = 0.0) {
  const double noise = db_to_linear(noise_db);
  cfg.sigma_r2 = cfg.sigma_d2 = noise;
  cfg.p_s = cfg.p_r = noise * db_to_linear(snr_db);
}

/// Symmetric system: all four antenna counts equal to n.
inline SystemConfig symmetric_config(int n, int d, double snr_db, double sigma_rr2_db = -20.0) {
  SystemConfig cfg;
  cfg.n_s = cfg.n_r = cfg.n_t = cfg.n_d = n;
  cfg.d = d;
  set_snr_db(cfg, snr_db);
  cfg.sigma_rr2 = db_to_linear(sigma_rr2_db);
  return cfg;
}

}  // namespace fdrelay
