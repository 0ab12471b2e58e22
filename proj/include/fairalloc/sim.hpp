#pragma once

// Budget-constrained episodes: tasks are dispatched until the consumed time
// first exceeds the budget B. The task that crosses B is run to completion
// (or its deadline) and its reward counts.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fairalloc/environment.hpp"
#include "fairalloc/offline.hpp"
#include "fairalloc/olum.hpp"
#include "fairalloc/rng.hpp"

namespace fairalloc {

struct Arm {
  std::size_t group;
  double deadline;
};

/// Draws every task's (group, deadline) independently from a fixed
/// distribution.
class SrpPolicy {
 public:
  SrpPolicy(const SrpDistribution& distribution, const DeadlineSet& deadlines);

  /// Group k with probability selection[k], always at deadlines[k].
  static SrpPolicy from_selection(std::span<const double> selection, std::span<const double> deadlines);

  /// The optimal SRP of an offline solution.
  static SrpPolicy oracle(const OfflineSolution& solution);

  Arm draw(CounterRng& rng) const;

  std::span<const Arm> arms() const noexcept { return arms_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }

 private:
  SrpPolicy(std::vector<Arm> arms, std::vector<double> probabilities);

  std::vector<Arm> arms_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

struct OlumPolicy {
  OlumParams params;
};

using Policy = std::variant<SrpPolicy, OlumPolicy>;

/// One row of the optional per-task trace (OLUM only fills queues/gammas).
struct TraceRow {
  std::size_t task;
  std::size_t group;
  double deadline;
  double elapsed;
  double reward;
  std::vector<double> queues;  ///< after the update
  std::vector<double> gammas;
};

struct EpisodeOptions {
  /// Clip the budget-crossing task at B and drop its reward.
  bool truncate_last = false;
  std::function<void(const TraceRow&)> trace;
};

struct EpisodeResult {
  std::size_t n_tasks = 0;
  std::vector<double> per_group_reward;
  std::vector<double> per_group_time;
  std::vector<double> reward_rates;  ///< per_group_reward / B
  std::vector<double> time_shares;   ///< per_group_time / total consumed time
  double utility = 0.0;              ///< sum_k U_k(reward_rates_k)
  bool floored = false;
  double total_time = 0.0;           ///< unclipped sum of elapsed times
  double last_elapsed = 0.0;
  /// OLUM only: time-weighted mean of sum_k Q_k over tasks started in [B/2, B].
  std::optional<double> mean_queue_sum_second_half;
};

/// Task n of an episode with seed s draws group k's outcome from the stream
/// stream_key(s, n, k, 0); SRP decisions use stream_key(s, n, 0, 1).
EpisodeResult run_episode(const Environment& env, const Policy& policy, double budget,
                          std::uint64_t seed, const EpisodeOptions& options = {});

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> values);

struct McSummary {
  std::size_t trials = 0;
  double budget = 0.0;
  std::vector<MeanSe> reward_rates;
  std::vector<MeanSe> time_shares;
  MeanSe utility;                ///< across-trial mean of per-episode utility
  double utility_of_mean = 0.0;  ///< sum_k U_k(mean reward rate_k)
  double utility_of_mean_se = 0.0;
  double opt_utility = 0.0;      ///< offline optimum utility rate
  double regret = 0.0;           ///< opt_utility - utility_of_mean
  bool floored = false;
  std::optional<MeanSe> queue_sum_second_half;
};

struct McOptions {
  std::size_t threads = 1;
  bool truncate_last = false;
};

/// Runs trial i with seed base_seed + i. Results do not depend on the number
/// of threads.
McSummary monte_carlo(const Environment& env, const Policy& policy, double budget, std::size_t trials,
                      std::uint64_t base_seed, const McOptions& options = {});

/// Aggregates episodes in index order.
McSummary summarize(const Environment& env, std::span<const EpisodeResult> episodes, double budget,
                    double opt_utility);

struct RegretPoint {
  double budget = 0.0;
  double V = 0.0;
  double regret = 0.0;
  double stderr_ = 0.0;
  bool excluded = false;  ///< regret <= 0, left out of the slope fit
  McSummary summary;
};

struct RegretCurve {
  std::vector<RegretPoint> points;
  double slope = 0.0;  ///< least-squares slope of log(regret) against log(B); NaN if < 2 points
};

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// OLUM regret at each budget. V = default_v(B) unless `v_override` is set.
/// The budget grid must be increasing, have >= 4 points and span >= 1.5
/// decades.
RegretCurve regret_curve(const Environment& env, const OlumParams& params_template,
                         std::optional<double> v_override, std::span<const double> budgets,
                         std::size_t trials, std::uint64_t base_seed, const McOptions& options = {});

}  // namespace fairalloc
