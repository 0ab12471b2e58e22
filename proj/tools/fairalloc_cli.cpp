#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fairalloc/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained fair task allocation: offline solver, OLUM and Monte Carlo"};
  app.require_subcommand(1);

  fairalloc::RunOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t trials = 0;

  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"offline", "Solve the offline problem and print t*, r*, phi per group"},
      {"simulate", "Monte Carlo of the configured policy; writes summary.csv"},
      {"regret", "OLUM regret over the configured budget grid; writes regret.csv"},
      {"moments", "Print mu, theta and reward rate for every group and deadline"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out-dir", options.out_dir, "Directory for CSV output")->capture_default_str();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--trials", trials, "Override the trial count")->check(CLI::Range(2, 100000000));
    sub->add_option("--threads", options.threads, "Worker threads for Monte Carlo")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fairalloc::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) options.seed = seed;
  if (sub->count("--trials") > 0) options.trials = trials;
  return fairalloc::run_command_file(sub->get_name(), config_path, options, std::cout, std::cerr);
}
