#include <iostream>

#include <CLI11.hpp>

#include "skewprobe/errors.hpp"
#include "skewprobe/runner.hpp"

using namespace skewprobe;

int main(int argc, char** argv) {
  CLI::App app{"skewprobe: replayable gender-skew probing of chat models"};
  app.require_subcommand(1);
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "only print errors");
  app.add_flag("-v,--verbose", verbose, "print every task and resolution");

  std::string config_path, log_path, out_dir;
  auto* run = app.add_subcommand("run", "execute the full plan and write reports");
  run->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  auto* resume = app.add_subcommand("resume", "continue an interrupted run");
  resume->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  resume->add_option("--log", log_path, "run log to continue")->required()->check(CLI::ExistingFile);
  auto* report = app.add_subcommand("report", "recompute reports from a run log");
  report->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  report->add_option("--out", out_dir, "output directory")->required();
  auto* validate = app.add_subcommand("validate", "check a configuration and its data files");
  validate->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  RunEnvironment env;
  env.verbosity = quiet ? Verbosity::quiet : verbose ? Verbosity::verbose : Verbosity::normal;

  if (*validate) return cmd_validate(config_path, env);
  if (*report) return cmd_report(log_path, out_dir, env).exit_code;

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  if (*run) return cmd_run(config, env).exit_code;
  return cmd_resume(config, log_path, env).exit_code;
}
