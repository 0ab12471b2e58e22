#include "fairalloc/app.hpp"

#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fairalloc/errors.hpp"
#include "fairalloc/offline.hpp"
#include "fairalloc/report.hpp"
#include "fairalloc/sim.hpp"

namespace fairalloc {
namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  return file;
}

void close_output(std::ofstream& file, const std::filesystem::path& path) {
  file.close();
  if (!file) throw IoError(fmt::format("failed writing {}", path.string()));
}

void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

int run_offline(const ExperimentConfig& config, const RunOptions& options, std::ostream& out) {
  const Environment env = config.environment();
  const OfflineSolution solution = solve_offline(env);
  print_offline_table(out, env, solution);
  const auto path = options.out_dir / "offline.csv";
  auto file = open_output(path);
  write_offline_csv(file, env, solution);
  close_output(file, path);
  fmt::print(out, "wrote {}\n", path.string());
  return kExitOk;
}

int run_moments(const ExperimentConfig& config, const RunOptions& options, std::ostream& out) {
  const Environment env = config.environment();
  write_moments_csv(out, env);
  const auto path = options.out_dir / "moments.csv";
  auto file = open_output(path);
  write_moments_csv(file, env);
  close_output(file, path);
  return kExitOk;
}

int run_simulate(const ExperimentConfig& config, const RunOptions& options, std::ostream& out) {
  if (!config.simulate) throw ConfigError("experiment.simulate", "required by the simulate subcommand");
  const SimulateSpec& spec = *config.simulate;
  const std::size_t trials = options.trials.value_or(spec.trials);
  if (trials < 2) throw ConfigError("experiment.simulate.trials", "at least 2 trials are required");
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const Environment env = config.environment();

  std::optional<Policy> policy;
  std::optional<double> V;
  std::string name;
  if (spec.policy == PolicyKind::Olum) {
    const OlumParams params = config.olum_params(spec.budget);
    params.validate();
    V = params.V;
    name = "olum";
    policy.emplace(OlumPolicy{params});
    fmt::print(out, "V = {}{}  tau = {}\n", params.V, config.V ? "" : " (default)", params.tau);
  } else {
    name = "oracle";
    policy.emplace(SrpPolicy::oracle(solve_offline(env)));
  }

  McOptions mc{options.threads, config.truncate_last};
  const McSummary summary = monte_carlo(env, *policy, spec.budget, trials, seed, mc);
  print_summary(out, env, summary, name);

  const auto path = options.out_dir / "summary.csv";
  auto file = open_output(path);
  write_summary_csv(file, env, summary, name, config.alpha, V);
  close_output(file, path);
  fmt::print(out, "wrote {}\n", path.string());

  if (config.trace) {
    const auto trace_path = options.out_dir / "trace.csv";
    auto trace_file = open_output(trace_path);
    TraceWriter writer(trace_file, env.num_groups());
    EpisodeOptions episode{config.truncate_last, [&writer](const TraceRow& row) { writer(row); }};
    run_episode(env, *policy, spec.budget, seed, episode);
    close_output(trace_file, trace_path);
    fmt::print(out, "wrote {}\n", trace_path.string());
  }
  return kExitOk;
}

int run_regret(const ExperimentConfig& config, const RunOptions& options, std::ostream& out) {
  if (!config.regret) throw ConfigError("experiment.regret", "required by the regret subcommand");
  const RegretSpec& spec = *config.regret;
  const std::size_t trials = options.trials.value_or(spec.trials);
  if (trials < 2) throw ConfigError("experiment.regret.trials", "at least 2 trials are required");
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const Environment env = config.environment();

  OlumParams params = config.olum_params(spec.budgets.front());
  params.validate();
  if (config.V) {
    fmt::print(out, "V = {} (fixed)  tau = {}\n", *config.V, params.tau);
  } else {
    fmt::print(out, "V = sqrt(B / log B) per budget  tau = {}\n", params.tau);
  }

  McOptions mc{options.threads, config.truncate_last};
  const RegretCurve curve = regret_curve(env, params, config.V, spec.budgets, trials, seed, mc);
  fmt::print(out, "{:>10} {:>10} {:>14} {:>12}\n", "B", "V", "regret", "stderr");
  for (const auto& p : curve.points) {
    fmt::print(out, "{:>10} {:>10.4f} {:>14.6g} {:>12.3g}{}\n", p.budget, p.V, p.regret, p.stderr_,
               p.excluded ? "  (excluded from fit)" : "");
  }
  fmt::print(out, "log-log slope {:.4f}\n", curve.slope);

  const auto path = options.out_dir / "regret.csv";
  auto file = open_output(path);
  write_regret_csv(file, curve);
  close_output(file, path);
  fmt::print(out, "wrote {}\n", path.string());
  return kExitOk;
}

}  // namespace

int run_command(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options,
                std::ostream& out, std::ostream& err) {
  try {
    if (options.threads == 0) throw ConfigError("--threads", "must be at least 1");
    prepare_out_dir(options.out_dir);
    if (subcommand == "offline") return run_offline(config, options, out);
    if (subcommand == "simulate") return run_simulate(config, options, out);
    if (subcommand == "regret") return run_regret(config, options, out);
    if (subcommand == "moments") return run_moments(config, options, out);
    throw ConfigError("", fmt::format("unknown subcommand '{}'", subcommand));
  } catch (const ConfigError& e) {
    fmt::print(err, "config error:\n{}\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const NoRewardError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const IoError& e) {
    fmt::print(err, "i/o error: {}\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }
}

int run_command_file(const std::string& subcommand, const std::filesystem::path& config_path,
                     const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig config = parse_config(config_path);
    return run_command(subcommand, config, options, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error in {}:\n{}\n", config_path.string(), e.what());
    return kExitConfig;
  }
}

}  // namespace fairalloc
