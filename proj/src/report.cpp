#include "fairalloc/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace fairalloc {
namespace {

std::string label_of(const Environment& env, std::size_t k) {
  const std::string& label = env.groups[k].label();
  return label.empty() ? fmt::format("group-{}", k + 1) : label;
}

}  // namespace

void write_offline_csv(std::ostream& out, const Environment& env, const OfflineSolution& solution) {
  fmt::print(out, "{}\n", kOfflineHeader);
  for (std::size_t k = 0; k < solution.stats.size(); ++k) {
    const auto& s = solution.stats[k];
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", label_of(env, k), s.t_star, s.r_star, s.mu_star,
               solution.phi[k], solution.selection[k], solution.lambda, solution.utility_rate);
  }
}

void print_offline_table(std::ostream& out, const Environment& env, const OfflineSolution& solution) {
  fmt::print(out, "{:<12} {:>8} {:>10} {:>10} {:>10} {:>10}\n", "group", "t*", "r*", "mu*", "phi",
             "P*");
  for (std::size_t k = 0; k < solution.stats.size(); ++k) {
    const auto& s = solution.stats[k];
    fmt::print(out, "{:<12} {:>8.4g} {:>10.6f} {:>10.6f} {:>10.6f} {:>10.6f}\n", label_of(env, k),
               s.t_star, s.r_star, s.mu_star, solution.phi[k], solution.selection[k]);
  }
  fmt::print(out, "lambda = {:.8g}   utility rate = {:.8g}{}\n", solution.lambda, solution.utility_rate,
             solution.floored ? "   (floored)" : "");
}

void write_summary_csv(std::ostream& out, const Environment& env, const McSummary& summary,
                       const std::string& policy, double alpha, std::optional<double> V) {
  fmt::print(out, "{}\n", kSummaryHeader);
  const std::string v = V ? fmt::format("{}", *V) : std::string();
  for (std::size_t k = 0; k < summary.time_shares.size(); ++k) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{}\n", policy, alpha, summary.budget, v,
               summary.trials, label_of(env, k), summary.time_shares[k].mean, summary.time_shares[k].se,
               summary.reward_rates[k].mean, summary.reward_rates[k].se, summary.utility_of_mean,
               summary.regret);
  }
}

void print_summary(std::ostream& out, const Environment& env, const McSummary& summary,
                   const std::string& policy) {
  fmt::print(out, "policy {}  B = {}  trials = {}\n", policy, summary.budget, summary.trials);
  fmt::print(out, "{:<12} {:>22} {:>22}\n", "group", "time share (± se)", "reward rate (± se)");
  for (std::size_t k = 0; k < summary.time_shares.size(); ++k) {
    fmt::print(out, "{:<12} {:>12.6f} ± {:<8.2g} {:>12.6f} ± {:<8.2g}\n", label_of(env, k),
               summary.time_shares[k].mean, summary.time_shares[k].se, summary.reward_rates[k].mean,
               summary.reward_rates[k].se);
  }
  fmt::print(out, "utility {:.8g}  optimum {:.8g}  regret {:.6g} ± {:.2g}{}\n", summary.utility_of_mean,
             summary.opt_utility, summary.regret, summary.utility_of_mean_se,
             summary.floored ? "  (floored)" : "");
  if (summary.queue_sum_second_half) {
    fmt::print(out, "mean sum of queues over second half: {:.6g}\n", summary.queue_sum_second_half->mean);
  }
}

void write_regret_csv(std::ostream& out, const RegretCurve& curve) {
  fmt::print(out, "{}\n", kRegretHeader);
  for (const auto& p : curve.points) {
    fmt::print(out, "{},{},{},{},\n", p.budget, p.V, p.regret, p.stderr_);
  }
  fmt::print(out, "slope,,,,{}\n", curve.slope);
}

void write_moments_csv(std::ostream& out, const Environment& env) {
  fmt::print(out, "{}\n", kMomentsHeader);
  for (std::size_t k = 0; k < env.num_groups(); ++k) {
    for (double t : env.deadlines.values()) {
      const double mu = truncated_mean_time(env.groups[k].completion(), t);
      const double theta = expected_reward(env.groups[k], t);
      fmt::print(out, "{},{},{},{},{}\n", label_of(env, k), t, mu, theta, theta / mu);
    }
  }
}

TraceWriter::TraceWriter(std::ostream& out, std::size_t groups) : out_(&out) {
  fmt::print(out, "task,group,deadline,elapsed,reward");
  for (std::size_t k = 0; k < groups; ++k) fmt::print(out, ",Q_{}", k + 1);
  for (std::size_t k = 0; k < groups; ++k) fmt::print(out, ",gamma_{}", k + 1);
  fmt::print(out, "\n");
}

void TraceWriter::operator()(const TraceRow& row) {
  fmt::print(*out_, "{},{},{},{},{}", row.task, row.group + 1, row.deadline, row.elapsed, row.reward);
  for (double q : row.queues) fmt::print(*out_, ",{}", q);
  for (double g : row.gammas) fmt::print(*out_, ",{}", g);
  fmt::print(*out_, "\n");
}

}  // namespace fairalloc
