#include "runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using randattract::cli::RunOptions;

  CLI::App app{"Random attractors of non-autonomous stochastic reaction-diffusion equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RANDATTRACT_VERSION);

  RunOptions opts;
  std::uint64_t seed = 0;
  int levels = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "Run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "Output directory (default: $RANDATTRACT_OUT)");
    sub->add_option("--threads", opts.threads, "Worker threads, 0 for all cores");
    sub->add_option("--seed", seed, "Base seed, overrides the configuration");
  };

  add_common(app.add_subcommand("simulate", "Integrate the configured problem on independent paths"));
  add_common(app.add_subcommand("ou-diagnose", "Stationarity residuals and temperedness diagnostics"));
  add_common(app.add_subcommand("attractor-pullback", "Pullback ensemble estimate of the attractor"));
  add_common(app.add_subcommand("verify", "Run the invariant suite and write report.json"));
  auto* conv = app.add_subcommand("convergence", "Strong self-convergence study");
  add_common(conv);
  conv->add_option("--levels", levels, "Number of refinement levels")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : randattract::cli::kValidation;
  }

  opts.subcommand = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opts.seed = seed;
  if (opts.subcommand == "convergence" && sub->count("--levels") > 0) opts.levels = levels;
  return randattract::cli::run(opts, std::cerr);
}
