#include <CLI11.hpp>

#include <iostream>

#include "decoh/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"decoh: decoherence of two-level emitters and multidimensional coherent spectra"};
  app.require_subcommand(1);

  decoh::CliOptions opt;
  std::string out;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "configuration file")->required();
    sub->add_option("--out", out, "output directory (overrides the configured one)");
    sub->add_option("--seed", seed, "random seed (overrides the configured one)");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "run a single-, zero-, double-quantum or echo-decay scenario");
  auto* analyze = app.add_subcommand("analyze", "fit spectra or decay tables");
  auto* sweep = app.add_subcommand("sweep", "temperature or waiting-time sweep with the matching fit");
  auto* formats = app.add_subcommand("formats", "describe the file formats");
  add_common(simulate);
  add_common(analyze);
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : decoh::kExitConfig;
  }

  for (auto* sub : {simulate, analyze, sweep}) {
    if (!sub->parsed()) continue;
    if (sub->count("--out")) opt.out = out;
    if (sub->count("--seed")) opt.seed = seed;
  }

  if (simulate->parsed()) return decoh::run_simulate(opt, std::cerr);
  if (analyze->parsed()) return decoh::run_analyze(opt, std::cerr);
  if (sweep->parsed()) return decoh::run_sweep(opt, std::cerr);
  if (formats->parsed()) return decoh::run_formats(std::cout);
  return decoh::kExitConfig;
}
