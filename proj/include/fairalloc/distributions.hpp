#pragma once

// Group statistical models: completion-time and reward distributions, task
// sampling, and the truncated moments E[min{X, t}] and E[R * 1{X <= t}] that
// drive the deadline choice.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fairalloc/rng.hpp"

namespace fairalloc {

// ---------------------------------------------------------------------------
// Completion-time distributions. Each constructor validates its parameters.

/// Pareto with support [scale, inf): P(X > x) = (scale / x)^shape.
struct Pareto {
  Pareto(double scale, double shape);
  double scale;
  double shape;
};

struct Exponential {
  explicit Exponential(double rate);
  double rate;
};

struct Deterministic {
  explicit Deterministic(double value);
  double value;
};

/// Resamples uniformly from a fixed list of observed completion times.
struct Empirical {
  explicit Empirical(std::vector<double> samples);
  std::vector<double> samples;
};

using CompletionSpec = std::variant<Pareto, Exponential, Deterministic, Empirical>;

// ---------------------------------------------------------------------------
// Base reward (collected only when the task completes before its deadline).

/// Base reward = completion^exponent.
struct PowerOfTime {
  explicit PowerOfTime(double exponent);
  double exponent;
};

struct ConstantReward {
  explicit ConstantReward(double value);
  double value;
};

/// Base reward ~ Uniform[lo, hi], independent of the completion time.
struct ScaledUniform {
  ScaledUniform(double lo, double hi);
  double lo;
  double hi;
};

using RewardSpec = std::variant<PowerOfTime, ConstantReward, ScaledUniform>;

/// One group of task servers. Rejects Pareto completion paired with a
/// power-of-time reward whose exponent is not below the shape (the mean
/// reward would be infinite).
class GroupModel {
 public:
  GroupModel(CompletionSpec completion, RewardSpec reward, std::string label = {});

  const CompletionSpec& completion() const noexcept { return completion_; }
  const RewardSpec& reward() const noexcept { return reward_; }
  const std::string& label() const noexcept { return label_; }

 private:
  CompletionSpec completion_;
  RewardSpec reward_;
  std::string label_;
};

/// Finite, strictly increasing, non-empty set of admissible deadlines.
class DeadlineSet {
 public:
  explicit DeadlineSet(std::vector<double> deadlines);

  std::span<const double> values() const noexcept { return deadlines_; }
  std::size_t size() const noexcept { return deadlines_.size(); }
  double operator[](std::size_t i) const { return deadlines_[i]; }
  double smallest() const noexcept { return deadlines_.front(); }
  double largest() const noexcept { return deadlines_.back(); }
  /// Index of an exact member; throws std::out_of_range otherwise.
  std::size_t index_of(double t) const;

 private:
  std::vector<double> deadlines_;
};

struct TaskSample {
  double completion;
  double base_reward;
};

/// Draws the latent (completion, base reward) pair. Deadline censoring is the
/// caller's job.
TaskSample sample_task(const GroupModel& group, CounterRng& rng);

/// E[X]; +inf for Pareto with shape <= 1.
double mean_completion(const CompletionSpec& spec);

/// P(X <= t).
double completion_cdf(const CompletionSpec& spec, double t);

/// E[min{X, t}], t > 0.
double truncated_mean_time(const CompletionSpec& spec, double t);

/// E[R * 1{X <= t}], t > 0. An exponential completion time with a
/// power-of-time reward goes through the lower incomplete gamma function.
double expected_reward(const GroupModel& group, double t);

/// expected_reward / truncated_mean_time.
double reward_per_processing_time(const GroupModel& group, double t);

}  // namespace fairalloc
