#include <iostream>

#include "CLI11.hpp"

#include "imethod/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral NLS lab: evolve, sweep, check, norms"};
  imethod::CliOptions options;
  std::uint64_t seed = 0;
  std::string out;

  app.add_option("command", options.command, "evolve | sweep | check | norms")
      ->required()
      ->check(CLI::IsMember({"evolve", "sweep", "check", "norms"}));
  app.add_option("--config", options.config, "JSON run configuration")->required();
  auto* out_opt = app.add_option("--out", out, "Override output_dir");
  auto* seed_opt = app.add_option("--seed", seed, "Override the initial-data seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : imethod::kExitConfigError;
  }
  if (*out_opt) options.out = out;
  if (*seed_opt) options.seed = seed;
  return imethod::execute(options, std::cout, std::cerr);
}
