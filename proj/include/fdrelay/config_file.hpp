#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fdrelay/config.hpp"
#include "fdrelay/pbsum.hpp"

namespace fdrelay {

/// Value of one `key = value` line: number, quoted string, boolean, or a
/// bracketed list of numbers or strings.
using ConfigValue = std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>>;

/// Flat view of a TOML-style file. Keys inside `[section]` are stored as
/// "section.key". Comments start with '#'.
using ConfigTable = std::map<std::string, ConfigValue>;

/// Throws ConfigError with the line number on malformed input.
ConfigTable parse_config_text(const std::string& text);

enum class SweepVar { kSnrDb, kNtr, kNsd, kNall, kNr, kNt };

const char* to_string(SweepVar v);
SweepVar parse_sweep_var(const std::string& name);

enum class Solver { kGradient, kTzf, kRzf, kGlobal2x2, kPbsum, kUpperBound, kHdHalf };

const char* to_string(Solver s);
Solver parse_solver(const std::string& name);

struct ExperimentSpec {
  SweepVar sweep_var = SweepVar::kSnrDb;
  std::vector<double> sweep_values{0, 5, 10, 15, 20, 25};
  int trials = 100;
  std::vector<Solver> solvers{Solver::kGradient, Solver::kTzf, Solver::kRzf};

  /// Base system; the swept quantity overrides the matching fields.
  SystemConfig base = symmetric_config(2, 1, 10.0);
  double snr_db = 10.0;
  double noise_db = 0.0;
  double sigma_rr2_db = -20.0;
  int streams = 0;  ///< 0: min of the four antenna counts at each sweep point

  std::uint64_t master_seed = 1;
  std::string output = "results.csv";
  int threads = 0;  ///< 0: hardware concurrency
  bool record_wall_time = false;

  pbsum::PenaltySchedule schedule;
  int gradient_starts = 5;

  /// System at one sweep point. Throws ConfigError if the point is invalid.
  SystemConfig config_at(double sweep_value) const;

  /// Full check: every sweep point, every solver/dimension pairing, counts.
  void validate() const;
};

ExperimentSpec parse_experiment_spec(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

/// Commented template accepted by parse_experiment_spec.
std::string experiment_template();

}  // namespace fdrelay
