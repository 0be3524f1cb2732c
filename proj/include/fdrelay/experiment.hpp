#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdrelay/config_file.hpp"

namespace fdrelay {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvHeader = "sweep_var,sweep_value,solver,trial,seed,rate_bits,sinr,iters,resid_inf,wall_ms";

struct ResultRow {
  std::string sweep_var;
  double sweep_value = 0;
  int sweep_index = 0;
  std::string solver;
  int solver_index = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double rate_bits = 0;
  double sinr = 0;  ///< exp(rate in nats) - 1; the SINR itself for rank-one designs
  long iters = 0;
  double resid_inf = -1;  ///< < 0: not applicable (written as an empty field)
  double wall_ms = 0;
};

/// All rows of one trial (channel draw shared by every solver).
std::vector<ResultRow> run_trial(const ExperimentSpec& spec, int sweep_index, int trial);

/// Runs the sweep on a thread pool and returns rows sorted by
/// (sweep index, solver order in the spec, trial).
std::vector<ResultRow> run_rows(const ExperimentSpec& spec);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::string csv_string(const std::vector<ResultRow>& rows);

/// Validates, runs, writes spec.output and spec.output + ".manifest.json".
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

struct SummaryCell {
  std::string sweep_var;
  std::string sweep_value;  ///< verbatim from the CSV
  std::string solver;
  int n = 0;
  double mean_rate_bits = 0;
  double stderr_rate_bits = 0;
  double mean_sinr = 0;
  double stderr_sinr = 0;
};

/// Groups rows by (sweep_var, sweep_value, solver) in order of first
/// appearance. stderr uses the n-1 sample deviation and is 0 for n = 1.
/// Throws ConfigError on a malformed CSV.
std::vector<SummaryCell> summarize_csv(std::istream& csv);
std::vector<SummaryCell> summarize(const std::string& csv_path);

void write_summary(std::ostream& out, const std::vector<SummaryCell>& cells);

}  // namespace fdrelay
