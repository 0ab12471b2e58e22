#pragma once

// Online learner for utility maximization: virtual queues Q_k act as dual
// variables for each group's reward-rate target, auxiliary variables gamma_k
// set those targets from the utility's marginal, and every task goes to the
// (group, deadline) pair with the largest Q-weighted empirical reward per
// processing time. Feedback for all groups of task n is released after a
// delay of tau tasks.

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "fairalloc/distributions.hpp"
#include "fairalloc/utility.hpp"

namespace fairalloc {

/// Upper bound applied to the auxiliary variables.
struct GammaCap {
  enum class Mode { EmpiricalRate, Fixed };
  Mode mode = Mode::EmpiricalRate;
  /// The cap in Fixed mode, and the fallback in EmpiricalRate mode before any
  /// samples are available.
  double value = 1.0;
  /// EmpiricalRate mode only: a linear utility's target rate is this multiple
  /// of the empirical cap. The target has to sit strictly above the achievable
  /// rate, otherwise the best group's queue has zero drift below V * w and
  /// wanders into the other groups' region.
  double linear_headroom = 2.0;
};

struct OlumParams {
  double V = 20.0;
  std::size_t tau = 1;
  GammaCap cap{};

  /// Throws std::invalid_argument unless V > 0, tau >= 1 and cap value > 0.
  void validate() const;
};

/// Step size suggested by the regret analysis: V = c * sqrt(B / log B).
double default_v(double budget, double c = 1.0);

struct Decision {
  std::size_t group = 0;
  std::size_t deadline_index = 0;
  double deadline = 0.0;
};

/// Dual variables, delayed-feedback buffer and sample-based estimators.
class OlumState {
 public:
  OlumState(std::size_t num_groups, DeadlineSet deadlines, std::size_t tau);

  std::size_t num_groups() const noexcept { return queues_.size(); }
  const DeadlineSet& deadlines() const noexcept { return deadlines_; }
  std::size_t tau() const noexcept { return tau_; }

  /// 1-based index of the task about to be decided.
  std::size_t stage() const noexcept { return stage_; }

  std::span<const double> queues() const noexcept { return queues_; }
  void set_queue(std::size_t k, double q);

  /// Observations released so far (identical count for every group).
  std::size_t sample_count() const noexcept { return released_; }
  std::span<const TaskSample> samples(std::size_t k) const { return samples_.at(k); }

  /// Empirical E[min{X, t}] and E[R(t)] from the released samples of group k.
  /// Any t > 0; values on the deadline grid come from running sums.
  double mu_hat(std::size_t k, double t) const;
  double theta_hat(std::size_t k, double t) const;

  double mu_hat_at(std::size_t k, std::size_t l) const;
  double theta_hat_at(std::size_t k, std::size_t l) const;

  /// max_t theta_hat / mu_hat over the deadline grid; requires samples.
  double best_empirical_rate(std::size_t k) const;

  /// Buffers the full-information vector of task `task_index` (one sample per
  /// group); it becomes visible to the estimators at stage task_index + tau.
  /// Vectors must arrive in task order, once per completed task.
  void ingest_feedback(std::size_t task_index, std::span<const TaskSample> vector);

  /// Q_k <- max(0, Q_k + gamma_k * elapsed - reward * 1{k == chosen}) for all k,
  /// then advances to the next stage.
  void update_queues(std::size_t chosen_group, double elapsed, double reward,
                     std::span<const double> gammas);

 private:
  void release_ready();

  DeadlineSet deadlines_;
  std::size_t tau_;
  std::size_t stage_ = 1;
  std::vector<double> queues_;
  std::vector<std::vector<TaskSample>> samples_;
  std::vector<std::vector<double>> sum_min_;     // [k][l] sum of min{x_i, t_l}
  std::vector<std::vector<double>> sum_reward_;  // [k][l] sum of r_i 1{x_i <= t_l}
  std::deque<std::vector<TaskSample>> pending_;
  std::size_t ingested_ = 0;
  std::size_t released_ = 0;
};

/// Arg-max of theta[k][l] * queues[k] / mu[k][l]; ties go to the smallest
/// group, then the smallest deadline.
Decision weighted_rate_argmax(std::span<const double> queues,
                              const std::vector<std::vector<double>>& theta,
                              const std::vector<std::vector<double>>& mu, const DeadlineSet& deadlines);

/// Next (group, deadline). During the first max(tau, K) stages, groups are
/// visited round-robin at the largest deadline.
Decision decide(const OlumState& state);

/// gamma_k = min((U_k')^{-1}(Q_k / V), cap_k). For the linear utility,
/// gamma_k = headroom * cap_k when Q_k / V < w_k and 0 otherwise.
double auxiliary(const OlumState& state, std::span<const UtilitySpec> utilities,
                 const OlumParams& params, std::size_t k);

}  // namespace fairalloc
