#include "fdrelay/config_file.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fdrelay/errors.hpp"

namespace fdrelay {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream in(s);
  in >> out;
  return !in.fail() && in.peek() == std::char_traits<char>::eof();
}

std::string parse_string(const std::string& s, int line) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail(line, "expected quoted string, got '" + s + "'");
  return s.substr(1, s.size() - 2);
}

ConfigValue parse_value(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.empty()) fail(line, "missing value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') return parse_string(s, line);
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "unterminated list");
    const std::string body = trim(s.substr(1, s.size() - 2));
    std::vector<std::string> items;
    std::string cur;
    bool quoted = false;
    for (char c : body) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    if (items.empty()) return std::vector<double>{};
    if (items.front().front() == '"') {
      std::vector<std::string> out;
      for (const auto& it : items) out.push_back(parse_string(it, line));
      return out;
    }
    std::vector<double> out;
    for (const auto& it : items) {
      double x;
      if (!parse_number(it, x)) fail(line, "bad list element '" + it + "'");
      out.push_back(x);
    }
    return out;
  }
  double x;
  if (!parse_number(s, x)) fail(line, "cannot parse value '" + s + "'");
  return x;
}

class Reader {
 public:
  explicit Reader(ConfigTable table) : table_(std::move(table)) {}

  template <class T>
  bool get(const std::string& key, T& out) {
    auto it = table_.find(key);
    if (it == table_.end()) return false;
    used_.insert(key);
    if (const T* v = std::get_if<T>(&it->second)) {
      out = *v;
      return true;
    }
    throw ConfigError("key '" + key + "' has the wrong type");
  }

  bool get_int(const std::string& key, int& out) {
    double x;
    if (!get(key, x)) return false;
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("key '" + key + "' must be an integer");
    out = static_cast<int>(x);
    return true;
  }

  bool get_seed(const std::string& key, std::uint64_t& out) {
    double x;
    if (!get(key, x)) return false;
    if (x < 0 || x != std::floor(x) || x > 9.007199254740992e15) {
      throw ConfigError("key '" + key + "' must be a non-negative integer below 2^53");
    }
    out = static_cast<std::uint64_t>(x);
    return true;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : table_) {
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "'");
    }
  }

 private:
  ConfigTable table_;
  std::set<std::string> used_;
};

bool is_antenna_sweep(SweepVar v) { return v != SweepVar::kSnrDb; }

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[' && s.find('=') == std::string::npos) {
      if (s.back() != ']') fail(line, "bad section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(line, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) fail(line, "duplicate key '" + full + "'");
    table[full] = parse_value(s.substr(eq + 1), line);
  }
  return table;
}

const char* to_string(SweepVar v) {
  switch (v) {
    case SweepVar::kSnrDb: return "snr_db";
    case SweepVar::kNtr: return "n_tr";
    case SweepVar::kNsd: return "n_sd";
    case SweepVar::kNall: return "n_all";
    case SweepVar::kNr: return "n_r";
    case SweepVar::kNt: return "n_t";
  }
  return "?";
}

SweepVar parse_sweep_var(const std::string& name) {
  for (SweepVar v : {SweepVar::kSnrDb, SweepVar::kNtr, SweepVar::kNsd, SweepVar::kNall, SweepVar::kNr, SweepVar::kNt}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown sweep variable '" + name + "' (snr_db, n_tr, n_sd, n_all, n_r, n_t)");
}

const char* to_string(Solver s) {
  switch (s) {
    case Solver::kGradient: return "gradient";
    case Solver::kTzf: return "tzf";
    case Solver::kRzf: return "rzf";
    case Solver::kGlobal2x2: return "global2x2";
    case Solver::kPbsum: return "pbsum";
    case Solver::kUpperBound: return "upper_bound";
    case Solver::kHdHalf: return "hd_half";
  }
  return "?";
}

Solver parse_solver(const std::string& name) {
  for (Solver s : {Solver::kGradient, Solver::kTzf, Solver::kRzf, Solver::kGlobal2x2, Solver::kPbsum,
                   Solver::kUpperBound, Solver::kHdHalf}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown solver '" + name + "'");
}

SystemConfig ExperimentSpec::config_at(double value) const {
  SystemConfig cfg = base;
  set_snr_db(cfg, snr_db, noise_db);
  cfg.sigma_rr2 = db_to_linear(sigma_rr2_db);
  if (is_antenna_sweep(sweep_var)) {
    if (value != std::floor(value) || value < 2 || value > 4096) {
      throw ConfigError(std::string("antenna sweep value ") + std::to_string(value) + " must be an integer >= 2");
    }
  }
  const int n = static_cast<int>(value);
  switch (sweep_var) {
    case SweepVar::kSnrDb: set_snr_db(cfg, value, noise_db); break;
    case SweepVar::kNtr: cfg.n_t = cfg.n_r = n; break;
    case SweepVar::kNsd: cfg.n_s = cfg.n_d = n; break;
    case SweepVar::kNall: cfg.n_s = cfg.n_r = cfg.n_t = cfg.n_d = n; break;
    case SweepVar::kNr: cfg.n_r = n; break;
    case SweepVar::kNt: cfg.n_t = n; break;
  }
  cfg.d = streams == 0 ? cfg.max_streams() : streams;
  cfg.validate();
  return cfg;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (sweep_values.empty()) throw ConfigError("sweep values must be non-empty");
  if (solvers.empty()) throw ConfigError("solver list must be non-empty");
  if (streams < 0) throw ConfigError("streams must be >= 0");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (gradient_starts < 1) throw ConfigError("gradient starts must be >= 1");
  if (output.empty()) throw ConfigError("output path must be set");
  schedule.validate();
  for (double value : sweep_values) {
    const SystemConfig cfg = config_at(value);
    for (Solver s : solvers) {
      if (s == Solver::kGlobal2x2 && (cfg.n_t != 2 || cfg.n_r != 2)) {
        throw ConfigError("global2x2 needs n_t = n_r = 2, sweep point " + std::string(to_string(sweep_var)) + "=" +
                          std::to_string(value) + " has n_t=" + std::to_string(cfg.n_t) +
                          " n_r=" + std::to_string(cfg.n_r));
      }
    }
  }
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
  Reader r(parse_config_text(text));
  ExperimentSpec spec;
  std::string sv;
  if (r.get("experiment.sweep_var", sv)) spec.sweep_var = parse_sweep_var(sv);
  r.get("experiment.sweep_values", spec.sweep_values);
  r.get_int("experiment.trials", spec.trials);
  std::vector<std::string> solvers;
  if (r.get("experiment.solvers", solvers)) {
    spec.solvers.clear();
    for (const auto& s : solvers) {
      const Solver parsed = parse_solver(s);
      if (std::find(spec.solvers.begin(), spec.solvers.end(), parsed) != spec.solvers.end()) {
        throw ConfigError("solver '" + s + "' listed twice");
      }
      spec.solvers.push_back(parsed);
    }
  }
  r.get_seed("experiment.seed", spec.master_seed);
  r.get("experiment.output", spec.output);
  r.get_int("experiment.threads", spec.threads);
  r.get("experiment.record_wall_time", spec.record_wall_time);

  r.get_int("system.n_s", spec.base.n_s);
  r.get_int("system.n_r", spec.base.n_r);
  r.get_int("system.n_t", spec.base.n_t);
  r.get_int("system.n_d", spec.base.n_d);
  r.get_int("system.d", spec.streams);
  r.get_int("system.tau", spec.base.tau);
  r.get("system.snr_db", spec.snr_db);
  r.get("system.noise_db", spec.noise_db);
  r.get("system.sigma_rr2_db", spec.sigma_rr2_db);

  r.get("pbsum.rho0", spec.schedule.rho0);
  r.get("pbsum.c", spec.schedule.c);
  r.get("pbsum.eps0", spec.schedule.eps0);
  r.get("pbsum.eps_outer", spec.schedule.eps_outer);
  r.get_int("pbsum.max_outer", spec.schedule.max_outer);
  r.get_int("pbsum.max_inner", spec.schedule.max_inner);

  r.get_int("gradient.starts", spec.gradient_starts);
  r.reject_unknown();
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str());
}

std::string experiment_template() {
  return R"(# fdrelay experiment
[experiment]
sweep_var = "snr_db"          # snr_db | n_tr | n_sd | n_all | n_r | n_t
sweep_values = [0, 5, 10, 15, 20, 25]
trials = 100
solvers = ["gradient", "global2x2", "tzf", "rzf", "hd_half", "upper_bound"]
seed = 1
output = "results.csv"
threads = 0                   # 0: all hardware threads
record_wall_time = false      # true fills wall_ms (output is then not byte-reproducible)

[system]
n_s = 2
n_r = 2
n_t = 2
n_d = 2
d = 0                         # 0: min of the antenna counts
tau = 1
snr_db = 10                   # used when the sweep is over antennas
noise_db = 0
sigma_rr2_db = -20

[pbsum]
rho0 = 0.001
c = 2
eps0 = 0.001
eps_outer = 1e-6
max_outer = 60
max_inner = 1000

[gradient]
starts = 5
)";
}

}  // namespace fdrelay
