// Command-line front end: simulate | verify <suite> | sweep.

#include <spdlog/spdlog.h>

#include <iostream>

#include "CLI11.hpp"

#include "torus_stab/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace torus_stab::cli;
  CLI::App app{"Damped fifth-order KdV-BBM simulator and Carleman verification suite"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string config, out;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "YAML run configuration");
    sub->add_option("--out", out, "output root (default $TORUS_STAB_OUT or ./torus_stab_out)");
    sub->add_flag("--force", opts.force, "overwrite an existing run directory");
    sub->add_option("--workers", opts.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the random seed");
    sub->add_flag("--quiet", quiet, "log warnings only");
  };

  auto* simulate = app.add_subcommand("simulate", "integrate one configuration");
  add_common(simulate);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  verify->add_option("suite", suite, "adjoint | identity | carleman-elliptic | carleman-transport | carleman-combined")
      ->required();
  add_common(verify);
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(kExitConfig);
  }

  if (!config.empty()) opts.config = config;
  if (!out.empty()) opts.out = out;
  for (auto* sub : {simulate, verify, sweep})
    if (sub->count("--seed")) opts.seed = seed;
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*simulate) return cmd_simulate(opts);
    if (*verify) return cmd_verify(suite, opts);
    return cmd_sweep(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
