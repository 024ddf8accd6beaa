// sojourn-cli <experiment> --config <path> [--out dir] [--workers N] [--format csv|json]
// Exit codes: 0 all checks pass, 1 a check failed, 2 config error, 3 computational or I/O error.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "sojourn/experiments.hpp"

using namespace sojourn;

namespace {

constexpr int kPass = 0, kCheckFailed = 1, kConfigError = 2, kComputeError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sojourn time and time delay experiments for the free Dirac operator"};
  std::string experiment, config_path, out_dir, format = "json";
  int workers = 0;
  bool print_default = false;
  app.add_option("experiment", experiment, "experiment name")->required()->check(CLI::IsMember(experiment_names()));
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--workers", workers, "worker threads (overrides workers)")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--print-default", print_default, "print the built-in config for the experiment and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kConfigError;
  }

  if (print_default) {
    std::cout << config_to_json(default_config(experiment));
    return kPass;
  }
  if (config_path.empty()) {
    std::cerr << "error: --config is required (use --print-default for a starting point)\n";
    return kConfigError;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (cfg.experiment != experiment)
      throw Error(ErrorKind::Config, "experiment: config names '" + cfg.experiment + "' but the command line asks for '" +
                                         experiment + "'");
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers > 0) cfg.workers = workers;
    validate_config(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  RunReport report;
  try {
    report = run_experiment(cfg);
  } catch (const StageError& e) {
    std::cerr << "error [" << error_kind_name(e.kind()) << "] " << e.what() << "\n";
    return kComputeError;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    }
    std::cerr << "error [" << error_kind_name(e.kind()) << "] " << e.what() << "\n";
    return kComputeError;
  }

  std::string path;
  try {
    path = emit_report(report, cfg.output_dir, format);
  } catch (const Error& e) {
    std::cerr << "error [" << error_kind_name(e.kind()) << "] " << e.what() << "\n";
    return kComputeError;
  }

  for (const auto& c : report.checks)
    std::printf("%-4s %-48s value=%.6g ref=%.6g tol=%.3g (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.reference, c.tolerance, c.mode.c_str());
  for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("report: %s\n", path.c_str());
  return report.passed() ? kPass : kCheckFailed;
}
