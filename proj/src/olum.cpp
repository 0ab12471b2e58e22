#include "fairalloc/olum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace fairalloc {

void OlumParams::validate() const {
  if (!(V > 0.0) || !std::isfinite(V)) throw std::invalid_argument(fmt::format("V must be > 0 (got {})", V));
  if (tau < 1) throw std::invalid_argument("tau must be >= 1");
  if (!(cap.value > 0.0) || !std::isfinite(cap.value)) {
    throw std::invalid_argument(fmt::format("gamma cap must be > 0 (got {})", cap.value));
  }
  if (!(cap.linear_headroom >= 1.0) || !std::isfinite(cap.linear_headroom)) {
    throw std::invalid_argument("linear headroom must be >= 1");
  }
}

double default_v(double budget, double c) {
  if (!(budget > 1.0)) throw std::invalid_argument("budget must exceed 1 to derive V");
  return c * std::sqrt(budget / std::log(budget));
}

OlumState::OlumState(std::size_t num_groups, DeadlineSet deadlines, std::size_t tau)
    : deadlines_(std::move(deadlines)),
      tau_(tau),
      queues_(num_groups, 1.0),
      samples_(num_groups),
      sum_min_(num_groups, std::vector<double>(deadlines_.size(), 0.0)),
      sum_reward_(num_groups, std::vector<double>(deadlines_.size(), 0.0)) {
  if (num_groups == 0) throw std::invalid_argument("OLUM needs at least one group");
  if (tau < 1) throw std::invalid_argument("tau must be >= 1");
}

void OlumState::set_queue(std::size_t k, double q) {
  if (!(q >= 0.0)) throw std::invalid_argument("queue values must be >= 0");
  queues_.at(k) = q;
}

double OlumState::mu_hat(std::size_t k, double t) const {
  const auto& s = samples_.at(k);
  if (s.empty()) throw std::logic_error("no samples released yet");
  double sum = 0.0;
  for (const auto& x : s) sum += std::min(x.completion, t);
  return sum / static_cast<double>(s.size());
}

double OlumState::theta_hat(std::size_t k, double t) const {
  const auto& s = samples_.at(k);
  if (s.empty()) throw std::logic_error("no samples released yet");
  double sum = 0.0;
  for (const auto& x : s) {
    if (x.completion <= t) sum += x.base_reward;
  }
  return sum / static_cast<double>(s.size());
}

double OlumState::mu_hat_at(std::size_t k, std::size_t l) const {
  if (released_ == 0) throw std::logic_error("no samples released yet");
  return sum_min_.at(k).at(l) / static_cast<double>(released_);
}

double OlumState::theta_hat_at(std::size_t k, std::size_t l) const {
  if (released_ == 0) throw std::logic_error("no samples released yet");
  return sum_reward_.at(k).at(l) / static_cast<double>(released_);
}

double OlumState::best_empirical_rate(std::size_t k) const {
  if (released_ == 0) throw std::logic_error("no samples released yet");
  double best = 0.0;
  for (std::size_t l = 0; l < deadlines_.size(); ++l) {
    // The sample count cancels in the ratio.
    best = std::max(best, sum_reward_[k][l] / sum_min_[k][l]);
  }
  return best;
}

void OlumState::ingest_feedback(std::size_t task_index, std::span<const TaskSample> vector) {
  if (task_index != ingested_ + 1) {
    throw std::invalid_argument(fmt::format("feedback for task {} arrived out of order (expected {})",
                                            task_index, ingested_ + 1));
  }
  if (task_index > stage_) {
    throw std::invalid_argument(fmt::format("feedback for task {} before it was run", task_index));
  }
  if (vector.size() != num_groups()) {
    throw std::invalid_argument("feedback vector needs one sample per group");
  }
  for (const auto& s : vector) {
    if (!(s.completion > 0.0) || !(s.base_reward >= 0.0)) {
      throw std::invalid_argument("feedback samples need completion > 0 and reward >= 0");
    }
  }
  pending_.emplace_back(vector.begin(), vector.end());
  ++ingested_;
  release_ready();
}

void OlumState::release_ready() {
  // Task i becomes visible at stage i + tau.
  while (!pending_.empty() && released_ + 1 + tau_ <= stage_) {
    const auto& vec = pending_.front();
    for (std::size_t k = 0; k < num_groups(); ++k) {
      const TaskSample& s = vec[k];
      samples_[k].push_back(s);
      for (std::size_t l = 0; l < deadlines_.size(); ++l) {
        const double t = deadlines_[l];
        sum_min_[k][l] += std::min(s.completion, t);
        if (s.completion <= t) sum_reward_[k][l] += s.base_reward;
      }
    }
    pending_.pop_front();
    ++released_;
  }
}

void OlumState::update_queues(std::size_t chosen_group, double elapsed, double reward,
                              std::span<const double> gammas) {
  if (chosen_group >= num_groups()) throw std::out_of_range("chosen group out of range");
  if (!(elapsed >= 0.0) || !(reward >= 0.0)) {
    throw std::invalid_argument("elapsed time and reward must be >= 0");
  }
  if (gammas.size() != num_groups()) throw std::invalid_argument("one gamma per group is required");
  for (std::size_t k = 0; k < num_groups(); ++k) {
    const double served = k == chosen_group ? reward : 0.0;
    queues_[k] = std::max(0.0, queues_[k] + gammas[k] * elapsed - served);
  }
  ++stage_;
  release_ready();
}

Decision weighted_rate_argmax(std::span<const double> queues,
                              const std::vector<std::vector<double>>& theta,
                              const std::vector<std::vector<double>>& mu, const DeadlineSet& deadlines) {
  Decision best{0, 0, deadlines[0]};
  double best_score = -1.0;
  for (std::size_t k = 0; k < queues.size(); ++k) {
    for (std::size_t l = 0; l < deadlines.size(); ++l) {
      const double score = theta[k][l] * queues[k] / mu[k][l];
      if (score > best_score) {
        best_score = score;
        best = {k, l, deadlines[l]};
      }
    }
  }
  return best;
}

Decision decide(const OlumState& state) {
  const auto& deadlines = state.deadlines();
  const std::size_t groups = state.num_groups();
  const std::size_t n = state.stage();
  if (n <= std::max(state.tau(), groups) || state.sample_count() == 0) {
    return {(n - 1) % groups, deadlines.size() - 1, deadlines.largest()};
  }
  std::vector<std::vector<double>> theta(groups), mu(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    for (std::size_t l = 0; l < deadlines.size(); ++l) {
      theta[k].push_back(state.theta_hat_at(k, l));
      mu[k].push_back(state.mu_hat_at(k, l));
    }
  }
  return weighted_rate_argmax(state.queues(), theta, mu, deadlines);
}

double auxiliary(const OlumState& state, std::span<const UtilitySpec> utilities,
                 const OlumParams& params, std::size_t k) {
  const UtilitySpec& u = utilities[k];
  const double cap = params.cap.mode == GammaCap::Mode::Fixed || state.sample_count() == 0
                         ? params.cap.value
                         : state.best_empirical_rate(k);
  const double price = state.queues()[k] / params.V;
  if (u.is_linear()) {
    const double target =
        params.cap.mode == GammaCap::Mode::Fixed ? cap : params.cap.linear_headroom * cap;
    return price < u.weight() ? target : 0.0;
  }
  if (price <= 0.0) return cap;
  return std::min(u.inverse_marginal(price), cap);
}

}  // namespace fairalloc
