#include "fdrelay/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fdrelay/errors.hpp"
#include "fdrelay/fd_pbsum.hpp"
#include "fdrelay/global_search.hpp"
#include "fdrelay/kernels.hpp"
#include "fdrelay/random.hpp"
#include "fdrelay/rank1.hpp"

namespace fdrelay {

namespace {

constexpr std::uint64_t kGradientTag = 0x6772616469656e74ULL;
constexpr std::uint64_t kPbsumTag = 0x707273756d000001ULL;

template <class T>
struct Timed {
  T value;
  double ms = 0;
};

template <class F>
auto timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto v = f();
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return Timed<decltype(v)>{std::move(v), ms};
}

// Lazily computed solver outputs of one trial. The upper bound reuses the
// constrained designs as warm candidates regardless of which solvers were
// requested, so a row never depends on the solver list.
class TrialContext {
 public:
  TrialContext(const ExperimentSpec& spec, const SystemConfig& cfg, std::uint64_t seed)
      : spec_(spec), cfg_(cfg), seed_(seed), ch_(generate_channels(cfg, seed)) {}

  const Timed<Rank1Solution>& gradient() {
    if (!gradient_) {
      GradientOptions opts;
      opts.starts = spec_.gradient_starts;
      opts.seed = splitmix64(seed_ ^ kGradientTag);
      gradient_ = timed([&] { return gradient_ascent(ch_, cfg_, opts); });
    }
    return *gradient_;
  }
  const Timed<Rank1Solution>& tzf_solution() {
    if (!tzf_) tzf_ = timed([&] { return tzf(ch_, cfg_); });
    return *tzf_;
  }
  const Timed<Rank1Solution>& rzf_solution() {
    if (!rzf_) rzf_ = timed([&] { return rzf(ch_, cfg_); });
    return *rzf_;
  }
  const Timed<Rank1Solution>& global() {
    if (!global_) global_ = timed([&] { return global_search_2x2(ch_, cfg_); });
    return *global_;
  }
  const Timed<FdSolveResult>& pbsum() {
    if (!pbsum_) {
      pbsum_ = timed([&] { return solve_fd_pbsum(ch_, cfg_, spec_.schedule, splitmix64(seed_ ^ kPbsumTag)); });
    }
    return *pbsum_;
  }
  const Timed<UpperBoundResult>& upper_bound() {
    if (!ub_) {
      const std::vector<Precoders> candidates{pbsum().value.precoders, gradient().value.precoders(),
                                              tzf_solution().value.precoders(), rzf_solution().value.precoders(),
                                              rank1_without_si(ch_, cfg_).precoders()};
      ub_ = timed([&] {
        return solve_upper_bound_no_si(ch_, cfg_, spec_.schedule, splitmix64(seed_ ^ kPbsumTag), candidates);
      });
    }
    return *ub_;
  }

 private:
  const ExperimentSpec& spec_;
  SystemConfig cfg_;
  std::uint64_t seed_;
  ChannelSet ch_;
  std::optional<Timed<Rank1Solution>> gradient_, tzf_, rzf_, global_;
  std::optional<Timed<FdSolveResult>> pbsum_;
  std::optional<Timed<UpperBoundResult>> ub_;
};

void fill_rate(ResultRow& row, double nats) {
  if (!std::isfinite(nats) || nats < 0) {
    throw ContractViolation("solver " + row.solver + " produced rate " + std::to_string(nats) + " at trial " +
                            std::to_string(row.trial));
  }
  row.rate_bits = nats_to_bits(nats);
  row.sinr = std::expm1(nats);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_field(const std::string& s, int line, const char* name) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw ConfigError("malformed CSV line " + std::to_string(line) + ": bad " + name + " '" + s + "'");
  }
  return x;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<ResultRow> run_trial(const ExperimentSpec& spec, int sweep_index, int trial) {
  const double value = spec.sweep_values.at(sweep_index);
  const SystemConfig cfg = spec.config_at(value);
  const std::uint64_t seed = mix_seed(spec.master_seed, static_cast<std::uint64_t>(sweep_index),
                                      static_cast<std::uint64_t>(trial));
  TrialContext ctx(spec, cfg, seed);
  std::vector<ResultRow> rows;
  for (std::size_t k = 0; k < spec.solvers.size(); ++k) {
    const Solver s = spec.solvers[k];
    ResultRow row;
    row.sweep_var = to_string(spec.sweep_var);
    row.sweep_value = value;
    row.sweep_index = sweep_index;
    row.solver = to_string(s);
    row.solver_index = static_cast<int>(k);
    row.trial = trial;
    row.seed = seed;
    auto rank1_row = [&](const Timed<Rank1Solution>& r) {
      fill_rate(row, r.value.achieved_rate);
      row.sinr = r.value.achieved_sinr;
      row.iters = r.value.iterations;
      row.wall_ms = r.ms;
    };
    switch (s) {
      case Solver::kGradient: rank1_row(ctx.gradient()); break;
      case Solver::kTzf: rank1_row(ctx.tzf_solution()); break;
      case Solver::kRzf: rank1_row(ctx.rzf_solution()); break;
      case Solver::kGlobal2x2: rank1_row(ctx.global()); break;
      case Solver::kPbsum: {
        const auto& r = ctx.pbsum();
        fill_rate(row, r.value.rate);
        row.iters = r.value.trace.total_inner;
        row.resid_inf = r.value.residual_inf;
        row.wall_ms = r.ms;
        break;
      }
      case Solver::kUpperBound:
      case Solver::kHdHalf: {
        const auto& r = ctx.upper_bound();
        fill_rate(row, s == Solver::kUpperBound ? r.value.rate : r.value.rate / 2);
        row.iters = r.value.solve.trace.total_inner;
        row.resid_inf = r.value.solve.residual_inf;
        row.wall_ms = r.ms;
        break;
      }
    }
    if (!spec.record_wall_time) row.wall_ms = 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_rows(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t n_points = spec.sweep_values.size();
  const std::size_t n_tasks = n_points * static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<ResultRow>> slots(n_tasks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      try {
        slots[task] = run_trial(spec, static_cast<int>(task / spec.trials), static_cast<int>(task % spec.trials));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };

  std::size_t n_threads = spec.threads > 0 ? static_cast<std::size_t>(spec.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, n_tasks);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<ResultRow> rows;
  rows.reserve(n_tasks * spec.solvers.size());
  for (auto& slot : slots) {
    for (auto& r : slot) rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.sweep_index != b.sweep_index) return a.sweep_index < b.sweep_index;
    if (a.solver_index != b.solver_index) return a.solver_index < b.solver_index;
    return a.trial < b.trial;
  });
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.sweep_var << ',' << fmt("%.10g", r.sweep_value) << ',' << r.solver << ',' << r.trial << ',' << r.seed
        << ',' << fmt("%.12g", r.rate_bits) << ',' << fmt("%.12g", r.sinr) << ',' << r.iters << ','
        << (r.resid_inf < 0 ? std::string() : fmt("%.6e", r.resid_inf)) << ',' << fmt("%.3f", r.wall_ms) << '\n';
  }
}

std::string csv_string(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ResultRow> rows = run_rows(spec);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream csv(spec.output);
  if (!csv) throw ConfigError("cannot write output '" + spec.output + "'");
  write_csv(csv, rows);

  nlohmann::json m;
  m["version"] = kVersion;
  m["created_utc"] = utc_timestamp();
  m["elapsed_s"] = seconds;
  m["csv"] = spec.output;
  m["rows"] = rows.size();
  m["master_seed"] = spec.master_seed;
  m["seed_rule"] = "mix(master, i, j) = splitmix64(splitmix64(splitmix64(master) ^ i) ^ j)";
  m["sweep_var"] = to_string(spec.sweep_var);
  m["sweep_values"] = spec.sweep_values;
  m["trials"] = spec.trials;
  std::vector<std::string> solvers;
  for (Solver s : spec.solvers) solvers.push_back(to_string(s));
  m["solvers"] = solvers;
  m["system"] = {{"n_s", spec.base.n_s},        {"n_r", spec.base.n_r},       {"n_t", spec.base.n_t},
                 {"n_d", spec.base.n_d},        {"d", spec.streams},          {"tau", spec.base.tau},
                 {"snr_db", spec.snr_db},       {"noise_db", spec.noise_db}, {"sigma_rr2_db", spec.sigma_rr2_db}};
  m["pbsum"] = {{"rho0", spec.schedule.rho0},           {"c", spec.schedule.c},
                {"eps0", spec.schedule.eps0},           {"eps_outer", spec.schedule.eps_outer},
                {"max_outer", spec.schedule.max_outer}, {"max_inner", spec.schedule.max_inner}};
  m["gradient"] = {{"starts", spec.gradient_starts}};
  m["threads"] = spec.threads;
  m["record_wall_time"] = spec.record_wall_time;
  m["isa"] = std::string(kernels::isa_name(kernels::active_isa()));

  std::ofstream man(spec.output + ".manifest.json");
  if (!man) throw ConfigError("cannot write manifest for '" + spec.output + "'");
  man << m.dump(2) << '\n';
  return rows;
}

std::vector<SummaryCell> summarize_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("malformed CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("malformed CSV: unexpected header '" + line + "'");

  struct Acc {
    SummaryCell cell;
    std::vector<double> rates, sinrs;
  };
  std::vector<Acc> groups;
  std::map<std::string, std::size_t> index;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 10) {
      throw ConfigError("malformed CSV line " + std::to_string(n) + ": expected 10 fields, got " +
                        std::to_string(f.size()));
    }
    parse_field(f[1], n, "sweep_value");
    const double rate = parse_field(f[5], n, "rate_bits");
    const double sinr = parse_field(f[6], n, "sinr");
    const std::string key = f[0] + '\x1f' + f[1] + '\x1f' + f[2];
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      Acc acc;
      acc.cell.sweep_var = f[0];
      acc.cell.sweep_value = f[1];
      acc.cell.solver = f[2];
      groups.push_back(std::move(acc));
    }
    groups[it->second].rates.push_back(rate);
    groups[it->second].sinrs.push_back(sinr);
  }

  auto mean_stderr = [](const std::vector<double>& xs, double& mean, double& se) {
    const double k = static_cast<double>(xs.size());
    mean = 0;
    for (double x : xs) mean += x;
    mean /= k;
    se = 0;
    if (xs.size() < 2) return;
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (k - 1) / k);
  };

  std::vector<SummaryCell> cells;
  for (auto& g : groups) {
    g.cell.n = static_cast<int>(g.rates.size());
    mean_stderr(g.rates, g.cell.mean_rate_bits, g.cell.stderr_rate_bits);
    mean_stderr(g.sinrs, g.cell.mean_sinr, g.cell.stderr_sinr);
    cells.push_back(g.cell);
  }
  return cells;
}

std::vector<SummaryCell> summarize(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot read CSV '" + csv_path + "'");
  return summarize_csv(in);
}

void write_summary(std::ostream& out, const std::vector<SummaryCell>& cells) {
  out << "sweep_var,sweep_value,solver,n,mean_rate_bits,stderr_rate_bits,mean_sinr,stderr_sinr\n";
  for (const auto& c : cells) {
    out << c.sweep_var << ',' << c.sweep_value << ',' << c.solver << ',' << c.n << ',' << fmt("%.10g", c.mean_rate_bits)
        << ',' << fmt("%.10g", c.stderr_rate_bits) << ',' << fmt("%.10g", c.mean_sinr) << ','
        << fmt("%.10g", c.stderr_sinr) << '\n';
  }
}

}  // namespace fdrelay
