#include "hjlab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Modified-Hamiltonian Lax-Oleinik laboratory"};
  app.require_subcommand(1);

  hjlab::RunOptions options;
  std::string out;
  const std::pair<const char*, hjlab::Subcommand> commands[] = {
      {"verify-hr", hjlab::Subcommand::verify_hr},
      {"critical-value", hjlab::Subcommand::critical_value},
      {"evolve", hjlab::Subcommand::evolve},
      {"regularity-experiment", hjlab::Subcommand::regularity_experiment},
  };
  const char* help[] = {
      "Check C2, convexity, superlinearity and fidelity of H_R; tabulate L_R",
      "Estimate the critical value by long-time averaging and inf-max descent",
      "Evolve the first initial datum and export a trace and an orbit",
      "Run the multi-datum regularity experiment",
  };
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", options.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides output_dir)");
    sub->add_option("--threads", options.threads, "Worker threads")->envname("HJLAB_THREADS")->check(CLI::PositiveNumber);
    sub->callback([&options, cmd = commands[i].second] { options.command = cmd; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : hjlab::exit_code::failure;
  }
  if (!out.empty()) options.out = out;
  return hjlab::run(options, std::cerr);
}
