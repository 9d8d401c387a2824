// Command-line front end: runs configured experiments, lists presets and
// validates configs.  Exit codes: 0 ok, 1 regression-check failure, 2 config
// error.
#include <CLI11.hpp>
#include <iostream>

#include "rmp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rmplab - numerical laboratory for random matrix products"};
  app.require_subcommand(1);

  rmp::runner::RunOptions opts;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", opts.config_path, "path to the experiment config")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override master_seed");
  auto* threads_opt = run->add_option("--threads", threads, "override worker thread count");
  auto* out_opt = run->add_option("--out", out_dir, "override output directory");
  run->add_flag("--check", opts.check, "compare the summary against the expected-results file");
  run->add_option("--expected", opts.expected_results_path,
                  "path to the expected-results file");

  auto* list = app.add_subcommand("list-presets", "list the shipped step-measure presets");

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "validate a config without running it");
  val->add_option("--config", validate_path, "path to the experiment config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    std::cout << rmp::runner::list_presets_text();
    return 0;
  }
  if (val->parsed()) {
    return rmp::runner::validate(validate_path, std::cout);
  }
  if (seed_opt->count() > 0) opts.seed_override = seed;
  if (threads_opt->count() > 0) opts.threads_override = threads;
  if (out_opt->count() > 0) opts.out_override = out_dir;
  return rmp::runner::run(opts, std::cout);
}
