#include "fairalloc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

namespace fairalloc {
namespace {

constexpr std::uint64_t kOutcomeStream = 0;
constexpr std::uint64_t kDecisionStream = 1;

struct Accumulator {
  explicit Accumulator(std::size_t groups)
      : reward(groups, 0.0), time(groups, 0.0) {}

  std::vector<double> reward;
  std::vector<double> time;
  double consumed = 0.0;
  double last_elapsed = 0.0;
  std::size_t tasks = 0;
};

// Credits one task and reports whether the budget is now exhausted.
bool credit(Accumulator& acc, std::size_t group, double elapsed, double reward, double budget,
            bool truncate_last) {
  const bool crossing = acc.consumed + elapsed > budget;
  double credited_time = elapsed;
  double credited_reward = reward;
  if (crossing && truncate_last) {
    credited_time = budget - acc.consumed;
    credited_reward = 0.0;
  }
  acc.reward[group] += credited_reward;
  acc.time[group] += credited_time;
  acc.consumed += elapsed;
  acc.last_elapsed = elapsed;
  ++acc.tasks;
  return crossing;
}

EpisodeResult finish(const Environment& env, const Accumulator& acc, double budget) {
  const std::size_t groups = env.num_groups();
  EpisodeResult out;
  out.n_tasks = acc.tasks;
  out.per_group_reward = acc.reward;
  out.per_group_time = acc.time;
  out.total_time = acc.consumed;
  out.last_elapsed = acc.last_elapsed;
  const double used = std::accumulate(acc.time.begin(), acc.time.end(), 0.0);
  for (std::size_t k = 0; k < groups; ++k) {
    out.reward_rates.push_back(acc.reward[k] / budget);
    out.time_shares.push_back(acc.time[k] / used);
    auto u = env.utilities[k].value_floored(out.reward_rates[k]);
    out.utility += u.value;
    out.floored = out.floored || u.floored;
  }
  return out;
}

EpisodeResult run_srp(const Environment& env, const SrpPolicy& policy, double budget,
                      std::uint64_t seed, const EpisodeOptions& options) {
  for (const Arm& arm : policy.arms()) {
    if (arm.group >= env.num_groups()) throw std::invalid_argument("SRP arm names an unknown group");
    env.deadlines.index_of(arm.deadline);
  }
  Accumulator acc(env.num_groups());
  for (std::size_t n = 1;; ++n) {
    CounterRng decision_rng(stream_key(seed, n, 0, kDecisionStream));
    const Arm arm = policy.draw(decision_rng);
    CounterRng outcome_rng(stream_key(seed, n, arm.group, kOutcomeStream));
    const TaskSample s = sample_task(env.groups[arm.group], outcome_rng);
    const double elapsed = std::min(s.completion, arm.deadline);
    const double reward = s.completion <= arm.deadline ? s.base_reward : 0.0;
    const bool done = credit(acc, arm.group, elapsed, reward, budget, options.truncate_last);
    if (options.trace) options.trace({n, arm.group, arm.deadline, elapsed, reward, {}, {}});
    if (done) break;
  }
  return finish(env, acc, budget);
}

EpisodeResult run_olum(const Environment& env, const OlumParams& params, double budget,
                       std::uint64_t seed, const EpisodeOptions& options) {
  params.validate();
  const std::size_t groups = env.num_groups();
  OlumState state(groups, env.deadlines, params.tau);
  Accumulator acc(groups);
  std::vector<TaskSample> outcomes(groups);
  std::vector<double> gammas(groups);
  double queue_area = 0.0;
  double queue_time = 0.0;

  for (;;) {
    const std::size_t n = state.stage();
    const Decision d = decide(state);
    for (std::size_t k = 0; k < groups; ++k) {
      CounterRng rng(stream_key(seed, n, k, kOutcomeStream));
      outcomes[k] = sample_task(env.groups[k], rng);
      gammas[k] = auxiliary(state, env.utilities, params, k);
    }
    const TaskSample& s = outcomes[d.group];
    const double elapsed = std::min(s.completion, d.deadline);
    const double reward = s.completion <= d.deadline ? s.base_reward : 0.0;

    if (acc.consumed >= 0.5 * budget) {
      const auto q = state.queues();
      queue_area += std::accumulate(q.begin(), q.end(), 0.0) * elapsed;
      queue_time += elapsed;
    }
    state.update_queues(d.group, elapsed, reward, gammas);
    state.ingest_feedback(n, outcomes);

    const bool done = credit(acc, d.group, elapsed, reward, budget, options.truncate_last);
    if (options.trace) {
      const auto q = state.queues();
      options.trace({n, d.group, d.deadline, elapsed, reward, {q.begin(), q.end()}, gammas});
    }
    if (done) break;
  }

  EpisodeResult out = finish(env, acc, budget);
  if (queue_time > 0.0) out.mean_queue_sum_second_half = queue_area / queue_time;
  return out;
}

}  // namespace

SrpPolicy::SrpPolicy(std::vector<Arm> arms, std::vector<double> probabilities)
    : arms_(std::move(arms)), probabilities_(std::move(probabilities)) {
  if (arms_.empty()) throw std::invalid_argument("SRP has no arm with positive probability");
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0)) throw std::invalid_argument("SRP probabilities must be >= 0");
    total += p;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("SRP probabilities sum to {}, not 1", total));
  }
}

SrpPolicy::SrpPolicy(const SrpDistribution& distribution, const DeadlineSet& deadlines)
    : SrpPolicy([&] {
        if (distribution.num_deadlines() != deadlines.size()) {
          throw std::invalid_argument("SRP distribution and deadline set disagree");
        }
        std::pair<std::vector<Arm>, std::vector<double>> parts;
        for (std::size_t k = 0; k < distribution.num_groups(); ++k) {
          for (std::size_t l = 0; l < deadlines.size(); ++l) {
            if (distribution(k, l) > 0.0) {
              parts.first.push_back({k, deadlines[l]});
              parts.second.push_back(distribution(k, l));
            }
          }
        }
        return SrpPolicy(std::move(parts.first), std::move(parts.second));
      }()) {}

SrpPolicy SrpPolicy::from_selection(std::span<const double> selection, std::span<const double> deadlines) {
  if (selection.size() != deadlines.size()) {
    throw std::invalid_argument("one deadline per group is required");
  }
  std::vector<Arm> arms;
  std::vector<double> probabilities;
  for (std::size_t k = 0; k < selection.size(); ++k) {
    if (selection[k] > 0.0) {
      arms.push_back({k, deadlines[k]});
      probabilities.push_back(selection[k]);
    } else if (selection[k] < 0.0) {
      throw std::invalid_argument("selection probabilities must be >= 0");
    }
  }
  return SrpPolicy(std::move(arms), std::move(probabilities));
}

SrpPolicy SrpPolicy::oracle(const OfflineSolution& solution) {
  std::vector<double> deadlines;
  for (const auto& s : solution.stats) deadlines.push_back(s.t_star);
  return from_selection(solution.selection, deadlines);
}

Arm SrpPolicy::draw(CounterRng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  idx = std::min(idx, arms_.size() - 1);
  return arms_[idx];
}

EpisodeResult run_episode(const Environment& env, const Policy& policy, double budget,
                          std::uint64_t seed, const EpisodeOptions& options) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw std::invalid_argument(fmt::format("budget must be finite and > 0 (got {})", budget));
  }
  if (const auto* srp = std::get_if<SrpPolicy>(&policy)) {
    return run_srp(env, *srp, budget, seed, options);
  }
  return run_olum(env, std::get<OlumPolicy>(policy).params, budget, seed, options);
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

McSummary summarize(const Environment& env, std::span<const EpisodeResult> episodes, double budget,
                    double opt_utility) {
  const std::size_t groups = env.num_groups();
  McSummary out;
  out.trials = episodes.size();
  out.budget = budget;
  out.opt_utility = opt_utility;

  std::vector<double> column(episodes.size());
  auto collect = [&](auto&& field) {
    for (std::size_t i = 0; i < episodes.size(); ++i) column[i] = field(episodes[i]);
    return mean_se(column);
  };
  for (std::size_t k = 0; k < groups; ++k) {
    out.reward_rates.push_back(collect([k](const EpisodeResult& e) { return e.reward_rates[k]; }));
    out.time_shares.push_back(collect([k](const EpisodeResult& e) { return e.time_shares[k]; }));
  }
  out.utility = collect([](const EpisodeResult& e) { return e.utility; });

  std::vector<double> slopes(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    const double m = out.reward_rates[k].mean;
    auto u = env.utilities[k].value_floored(m);
    out.utility_of_mean += u.value;
    out.floored = out.floored || u.floored;
    slopes[k] = env.utilities[k].marginal(std::max(m, kRateFloor));
  }
  // Delta method: per-trial linearization of U around the mean rates.
  out.utility_of_mean_se = collect([&](const EpisodeResult& e) {
                             double lin = 0.0;
                             for (std::size_t k = 0; k < groups; ++k) lin += slopes[k] * e.reward_rates[k];
                             return lin;
                           }).se;
  out.regret = opt_utility - out.utility_of_mean;

  if (!episodes.empty() && episodes.front().mean_queue_sum_second_half) {
    out.queue_sum_second_half =
        collect([](const EpisodeResult& e) { return e.mean_queue_sum_second_half.value_or(0.0); });
  }
  return out;
}

McSummary monte_carlo(const Environment& env, const Policy& policy, double budget, std::size_t trials,
                      std::uint64_t base_seed, const McOptions& options) {
  if (trials < 2) throw std::invalid_argument("monte carlo needs at least 2 trials");
  const double opt = solve_offline(env).utility_rate;

  std::vector<EpisodeResult> episodes(trials);
  EpisodeOptions episode_options;
  episode_options.truncate_last = options.truncate_last;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < trials; i = next++) {
      try {
        episodes[i] = run_episode(env, policy, budget, base_seed + i, episode_options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(env, episodes, budget, opt);
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y lengths differ");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RegretCurve regret_curve(const Environment& env, const OlumParams& params_template,
                         std::optional<double> v_override, std::span<const double> budgets,
                         std::size_t trials, std::uint64_t base_seed, const McOptions& options) {
  if (budgets.size() < 4) throw std::invalid_argument("regret curve needs at least 4 budgets");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 1.0)) throw std::invalid_argument("budgets must exceed 1");
    if (i > 0 && !(budgets[i] > budgets[i - 1])) throw std::invalid_argument("budgets must increase");
  }
  if (std::log10(budgets.back() / budgets.front()) < 1.5 - 1e-12) {
    throw std::invalid_argument("budget grid must span at least 1.5 decades");
  }

  RegretCurve curve;
  std::vector<double> xs, ys;
  for (double budget : budgets) {
    OlumParams params = params_template;
    params.V = v_override.value_or(default_v(budget));
    RegretPoint point;
    point.budget = budget;
    point.V = params.V;
    point.summary = monte_carlo(env, OlumPolicy{params}, budget, trials, base_seed, options);
    point.regret = point.summary.regret;
    point.stderr_ = point.summary.utility_of_mean_se;
    point.excluded = !(point.regret > 0.0);
    if (!point.excluded) {
      xs.push_back(budget);
      ys.push_back(point.regret);
    }
    curve.points.push_back(std::move(point));
  }
  curve.slope = fit_loglog_slope(xs, ys);
  return curve;
}

}  // namespace fairalloc
