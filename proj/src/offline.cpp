#include "fairalloc/offline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "fairalloc/errors.hpp"

namespace fairalloc {
namespace {

constexpr double kLambdaLow = 1e-12;
constexpr double kFractionTolerance = 1e-10;
constexpr int kMaxBisections = 400;
constexpr int kMaxDoublings = 2000;

void check_sizes(std::span<const UtilitySpec> utilities, std::span<const GroupStats> stats) {
  if (stats.empty()) throw std::invalid_argument("no groups");
  if (utilities.size() != stats.size()) {
    throw std::invalid_argument("utilities and stats must have the same length");
  }
}

double utility_sum(std::span<const UtilitySpec> utilities, std::span<const GroupStats> stats,
                   std::span<const double> phi, bool& floored) {
  double total = 0.0;
  for (std::size_t k = 0; k < stats.size(); ++k) {
    auto u = utilities[k].value_floored(stats[k].r_star * phi[k]);
    floored = floored || u.floored;
    total += u.value;
  }
  return total;
}

}  // namespace

GroupStats optimal_deadline(const GroupModel& group, const DeadlineSet& deadlines,
                            std::size_t group_index) {
  GroupStats best;
  best.group_index = group_index;
  best.r_star = -1.0;
  for (double t : deadlines.values()) {
    const double mu = truncated_mean_time(group.completion(), t);
    const double theta = expected_reward(group, t);
    const double r = theta / mu;
    if (r > best.r_star) best = {group_index, t, r, mu, theta};
  }
  if (!(best.r_star > 0.0)) {
    throw NoRewardError(fmt::format("group {} ('{}') yields no reward at any deadline",
                                    group_index, group.label()));
  }
  return best;
}

FractionSolution solve_fractions(std::span<const UtilitySpec> utilities,
                                 std::span<const GroupStats> stats) {
  check_sizes(utilities, stats);
  FractionSolution out;
  out.phi.assign(stats.size(), 0.0);

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < stats.size(); ++k) {
    if (utilities[k].is_linear()) {
      throw std::invalid_argument("solve_fractions needs alpha > 0; use the linear path");
    }
    if (stats[k].r_star > 0.0) {
      active.push_back(k);
    } else {
      out.floored = true;
    }
  }
  if (active.empty()) throw NoRewardError("no group yields any reward");

  auto total = [&](double lambda) {
    double sum = 0.0;
    for (std::size_t k : active) {
      const double r = stats[k].r_star;
      sum += utilities[k].inverse_marginal(lambda / r) / r;
    }
    return sum;
  };

  double lo = kLambdaLow;
  if (!(total(lo) > 1.0)) {
    throw NumericalError("time fractions already below 1 at the lower multiplier bracket");
  }
  double hi = 1.0;
  for (int i = 0; total(hi) >= 1.0; ++i) {
    if (i == kMaxDoublings) throw NumericalError("could not bracket the Lagrange multiplier");
    hi *= 2.0;
  }

  double lambda = 0.5 * (lo + hi);
  for (int i = 0;; ++i) {
    if (i == kMaxBisections) {
      throw NumericalError(fmt::format("multiplier bisection did not converge (bracket [{}, {}])", lo, hi));
    }
    lambda = 0.5 * (lo + hi);
    const double excess = total(lambda) - 1.0;
    if (std::abs(excess) <= kFractionTolerance) break;
    // total() decreases in lambda.
    (excess > 0.0 ? lo : hi) = lambda;
  }

  out.lambda = lambda;
  for (std::size_t k : active) {
    const double r = stats[k].r_star;
    out.phi[k] = utilities[k].inverse_marginal(lambda / r) / r;
  }
  return out;
}

std::vector<double> selection_from_fractions(std::span<const double> phi,
                                             std::span<const GroupStats> stats) {
  if (phi.size() != stats.size()) throw std::invalid_argument("phi and stats length mismatch");
  std::vector<double> selection(phi.size());
  double norm = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (!(stats[k].mu_star > 0.0)) throw std::invalid_argument("mu_star must be > 0");
    selection[k] = phi[k] / stats[k].mu_star;
    norm += selection[k];
  }
  if (!(norm > 0.0)) throw std::invalid_argument("time fractions are all zero");
  for (double& s : selection) s /= norm;
  return selection;
}

OfflineSolution alpha_fair_closed_form(double alpha, std::span<const UtilitySpec> utilities,
                                       std::span<const GroupStats> stats) {
  check_sizes(utilities, stats);
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  for (const auto& u : utilities) {
    if (u.alpha() != alpha) throw std::invalid_argument("closed form needs a common alpha");
  }

  OfflineSolution sol;
  sol.stats.assign(stats.begin(), stats.end());
  const std::size_t n = stats.size();
  sol.phi.assign(n, 0.0);

  if (alpha == 0.0) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (utilities[k].weight() * stats[k].r_star > utilities[best].weight() * stats[best].r_star) {
        best = k;
      }
    }
    sol.phi[best] = 1.0;
    sol.selection.assign(n, 0.0);
    sol.selection[best] = 1.0;
    sol.lambda = utilities[best].weight() * stats[best].r_star;
    sol.utility_rate = sol.lambda;
    return sol;
  }

  // phi_k proportional to r_k^(1/alpha - 1) w_k^(1/alpha).
  const double inv = 1.0 / alpha;
  std::vector<double> terms(n, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (stats[k].r_star > 0.0) {
      terms[k] = std::pow(stats[k].r_star, inv - 1.0) * std::pow(utilities[k].weight(), inv);
      sum += terms[k];
    } else {
      sol.floored = true;
    }
  }
  if (!(sum > 0.0)) throw NoRewardError("no group yields any reward");
  for (std::size_t k = 0; k < n; ++k) sol.phi[k] = terms[k] / sum;
  sol.selection = selection_from_fractions(sol.phi, stats);
  sol.lambda = std::pow(sum, alpha);

  if (sol.floored) {
    sol.utility_rate = utility_sum(utilities, stats, sol.phi, sol.floored);
  } else if (alpha == 1.0) {
    // Weighted logarithm sum_k w_k log(r_k phi_k).
    sol.utility_rate = utility_sum(utilities, stats, sol.phi, sol.floored);
  } else {
    sol.utility_rate = std::pow(sum, alpha) / (1.0 - alpha);
  }
  return sol;
}

OfflineSolution solve_offline(const Environment& env) {
  const std::size_t n = env.num_groups();
  std::vector<GroupStats> stats(n);
  std::size_t rewarding = 0;
  for (std::size_t k = 0; k < n; ++k) {
    try {
      stats[k] = optimal_deadline(env.groups[k], env.deadlines, k);
      ++rewarding;
    } catch (const NoRewardError&) {
      const double t = env.deadlines.smallest();
      stats[k] = {k, t, 0.0, truncated_mean_time(env.groups[k].completion(), t), 0.0};
    }
  }
  if (rewarding == 0) throw NoRewardError("no group yields any reward");

  const double alpha = env.utilities.front().alpha();
  const bool common_alpha = std::all_of(env.utilities.begin(), env.utilities.end(),
                                        [&](const UtilitySpec& u) { return u.alpha() == alpha; });
  if (common_alpha) return alpha_fair_closed_form(alpha, env.utilities, stats);

  auto fractions = solve_fractions(env.utilities, stats);
  OfflineSolution sol;
  sol.stats = std::move(stats);
  sol.phi = std::move(fractions.phi);
  sol.lambda = fractions.lambda;
  sol.floored = fractions.floored;
  sol.selection = selection_from_fractions(sol.phi, sol.stats);
  sol.utility_rate = utility_sum(env.utilities, sol.stats, sol.phi, sol.floored);
  return sol;
}

MomentTable moment_table(std::span<const GroupModel> groups, const DeadlineSet& deadlines) {
  MomentTable table;
  for (const auto& g : groups) {
    auto& mu = table.mu.emplace_back();
    auto& theta = table.theta.emplace_back();
    for (double t : deadlines.values()) {
      mu.push_back(truncated_mean_time(g.completion(), t));
      theta.push_back(expected_reward(g, t));
    }
  }
  return table;
}

SrpDistribution::SrpDistribution(std::vector<std::vector<double>> probabilities)
    : p_(std::move(probabilities)) {
  if (p_.empty() || p_.front().empty()) throw std::invalid_argument("empty SRP distribution");
  double total = 0.0;
  for (const auto& row : p_) {
    if (row.size() != p_.front().size()) throw std::invalid_argument("ragged SRP distribution");
    for (double v : row) {
      if (!(v >= 0.0)) throw std::invalid_argument("SRP probabilities must be >= 0");
      total += v;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("SRP probabilities sum to {}, not 1", total));
  }
}

SrpDistribution SrpDistribution::from_solution(const OfflineSolution& solution,
                                               const DeadlineSet& deadlines) {
  std::vector<std::vector<double>> p(solution.stats.size(), std::vector<double>(deadlines.size(), 0.0));
  for (std::size_t k = 0; k < solution.stats.size(); ++k) {
    p[k][deadlines.index_of(solution.stats[k].t_star)] = solution.selection[k];
  }
  return SrpDistribution(std::move(p));
}

SrpEvaluation utility_rate_of_srp(const SrpDistribution& p, const MomentTable& moments,
                                  std::span<const UtilitySpec> utilities) {
  const std::size_t n = p.num_groups();
  if (moments.mu.size() != n || utilities.size() != n) {
    throw std::invalid_argument("SRP, moments and utilities disagree on the number of groups");
  }
  double time_per_task = 0.0;
  SrpEvaluation out;
  out.rates.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < p.num_deadlines(); ++l) {
      time_per_task += p(k, l) * moments.mu[k][l];
      out.rates[k] += p(k, l) * moments.theta[k][l];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    out.rates[k] /= time_per_task;
    auto u = utilities[k].value_floored(out.rates[k]);
    out.floored = out.floored || u.floored;
    out.utility += u.value;
  }
  return out;
}

SrpEvaluation utility_rate_of_srp(const SrpDistribution& p, const Environment& env) {
  return utility_rate_of_srp(p, moment_table(env.groups, env.deadlines), env.utilities);
}

}  // namespace fairalloc
