// glsim: command-line front end.
//
//   glsim simulate <config.json> [--csv PATH] [--json PATH]
//   glsim experiment <name> <config.json> [--json PATH]
//   glsim check <config.json>
//
// Global flags: --verbose (per-step log on stderr), --timing (wall-clock
// fields in JSON output; omit for byte-reproducible files).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "glsim/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau solver with dynamic boundary conditions"};
  app.require_subcommand(1);

  glsim::CommandOptions opt;
  app.add_flag("--verbose", opt.verbose, "per-step log on stderr");
  app.add_flag("--timing", opt.timing, "include wall-clock time in JSON output");

  std::string config_path, experiment_name;

  auto* sim = app.add_subcommand("simulate", "run one simulation");
  sim->add_option("config", config_path, "config file")->required();
  sim->add_option("--csv", opt.csv_path, "time-series CSV path");
  sim->add_option("--json", opt.json_path, "JSON summary path (stdout if omitted)");

  auto* exp = app.add_subcommand("experiment", "run a study and emit its report");
  exp->add_option("name", experiment_name, "study name")
      ->required()
      ->check(CLI::IsMember(glsim::experiment_names()));
  exp->add_option("config", config_path, "config file")->required();
  exp->add_option("--json", opt.json_path, "report path (stdout if omitted)");

  auto* chk = app.add_subcommand("check", "check feedback, compatibility and geometry");
  chk->add_option("config", config_path, "config file")->required();

  // Flags are accepted before or after the subcommand.
  for (auto* sub : {sim, exp, chk}) {
    sub->add_flag("--verbose", opt.verbose, "per-step log on stderr");
    sub->add_flag("--timing", opt.timing, "include wall-clock time in JSON output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? glsim::kExitOk : glsim::kExitConfig;
  }

  glsim::RunConfig cfg;
  const int loaded = glsim::report_failure(std::cerr, [&] {
    cfg = glsim::load_config(config_path);
    return 0;
  });
  if (loaded != 0) return loaded;

  if (sim->parsed()) return glsim::cmd_simulate(cfg, opt, std::cout, std::cerr);
  if (exp->parsed()) return glsim::cmd_experiment(experiment_name, cfg, opt, std::cout, std::cerr);
  return glsim::cmd_check(cfg, std::cout, std::cerr);
}
