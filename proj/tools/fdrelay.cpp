#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fdrelay/errors.hpp"
#include "fdrelay/experiment.hpp"
#include "fdrelay/kernels.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex MIMO relay rate maximization: Monte-Carlo experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fdrelay::kVersion);

  auto* gen = app.add_subcommand("gen-config", "Print a commented experiment template");
  std::string gen_out;
  gen->add_option("-o,--output", gen_out, "Write the template here instead of stdout");

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::string output_override;
  int threads = -1;
  std::string isa = "auto";
  run->add_option("config", config_path, "Experiment config (TOML-style key = value)")->required();
  run->add_option("-o,--output", output_override, "Override the CSV output path");
  run->add_option("-j,--threads", threads, "Worker threads (0: all hardware threads)");
  run->add_option("--isa", isa, "Simulator kernels: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  auto* sum = app.add_subcommand("summarize", "Mean and standard error per (sweep value, solver)");
  std::string csv_path;
  std::string sum_out;
  sum->add_option("csv", csv_path, "Result CSV written by run")->required();
  sum->add_option("-o,--output", sum_out, "Write the summary here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) {
      if (gen_out.empty()) {
        std::cout << fdrelay::experiment_template();
      } else {
        std::ofstream out(gen_out);
        if (!out) throw fdrelay::ConfigError("cannot write '" + gen_out + "'");
        out << fdrelay::experiment_template();
      }
    } else if (*run) {
      fdrelay::ExperimentSpec spec = fdrelay::load_experiment_spec(config_path);
      if (!output_override.empty()) spec.output = output_override;
      if (threads >= 0) spec.threads = threads;
      if (isa == "scalar") fdrelay::kernels::set_isa(fdrelay::kernels::Isa::kScalar);
      if (isa == "avx2") {
        if (!fdrelay::kernels::avx2_available()) throw fdrelay::ConfigError("AVX2 kernels not available on this CPU");
        fdrelay::kernels::set_isa(fdrelay::kernels::Isa::kAvx2);
      }
      const auto rows = fdrelay::run_experiment(spec);
      std::cerr << "wrote " << rows.size() << " rows to " << spec.output << '\n';
    } else if (*sum) {
      const auto cells = fdrelay::summarize(csv_path);
      if (sum_out.empty()) {
        fdrelay::write_summary(std::cout, cells);
      } else {
        std::ofstream out(sum_out);
        if (!out) throw fdrelay::ConfigError("cannot write '" + sum_out + "'");
        fdrelay::write_summary(out, cells);
      }
    }
  } catch (const fdrelay::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fdrelay::DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fdrelay::ContractViolation& e) {
    std::cerr << "numerical contract violation: " << e.what() << '\n';
    return kNumericalError;
  } catch (const fdrelay::DegenerateError& e) {
    std::cerr << "numerical contract violation: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
