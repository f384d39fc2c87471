#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "qid/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum identification laboratory"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  qid::CliOptions opts;
  std::string config, out, vectors;
  std::uint64_t seed = 0, trials = 0;
  auto* config_opt = app.add_option("--config", config, "key=value configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "override the seed");
  auto* out_opt = app.add_option("--out", out, "write CSV here instead of stdout");
  auto* trials_opt = app.add_option("--trials", trials, "override the trial count")->check(CLI::PositiveNumber);
  auto* vectors_opt = app.add_option("--vectors", vectors, "test-vector file for auth-verify");

  for (const auto name : qid::subcommands()) app.add_subcommand(std::string(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : qid::kExitError;
  }

  if (*config_opt) opts.config_path = config;
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out_path = out;
  if (*trials_opt) opts.trials = trials;
  if (*vectors_opt) opts.vectors_path = vectors;

  return qid::run_cli(app.get_subcommands().front()->get_name(), opts, std::cout, std::cerr);
}
