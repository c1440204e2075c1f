#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "septensor/app/commands.hpp"

int main(int argc, char** argv) {
  using namespace septensor::app;
  CLI::App cli{"Separable tensor solver, trainer and inverter for parametric PDEs"};
  cli.set_version_flag("--version", kVersion);
  cli.require_subcommand(1);

  RunOptions opts;
  std::string out;
  std::uint64_t seed = 0;
  std::string chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Solve a configured PDE by mode-by-mode subspace iteration"},
      {"train", "Fit a separable field to a CSV dataset"},
      {"invert", "Recover parameters from a target field"},
      {"study", "Run a mesh and patch convergence sweep"},
      {"oracle", "Generate reference data with finite differences"}};
  for (auto [name, help] : commands) {
    CLI::App* sub = cli.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->callback([&chosen, name = std::string(name)] { chosen = name; });
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (CLI::App* sub : cli.get_subcommands()) {
    if (sub->count("--out")) opts.out_dir = out;
    if (sub->count("--seed")) opts.seed = seed;
  }
  return run_command(chosen, opts, std::cout, std::cerr);
}
