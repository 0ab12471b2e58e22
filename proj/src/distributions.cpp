#include "fairalloc/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/core.h>

#include "fairalloc/errors.hpp"

namespace fairalloc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("{} must be finite and > 0 (got {})", what, v));
  }
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("{} must be finite and >= 0 (got {})", what, v));
  }
}

void require_deadline(double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument(fmt::format("deadline must be > 0 (got {})", t));
  }
}

double pareto_truncated_mean(const Pareto& p, double t) {
  const double s = p.scale;
  const double g = p.shape;
  if (t <= s) return t;
  if (std::isinf(t)) return g > 1.0 ? g * s / (g - 1.0) : t;
  if (g == 1.0) return s + s * std::log(t / s);
  // s + s^g (s^(1-g) - t^(1-g)) / (g - 1), written in terms of t/s for accuracy.
  return s + s * (1.0 - std::pow(t / s, 1.0 - g)) / (g - 1.0);
}

// E[X^beta 1{X <= t}].
double power_moment(const CompletionSpec& spec, double beta, double t) {
  return std::visit(
      overloaded{
          [&](const Pareto& p) {
            if (t <= p.scale) return 0.0;
            const double g = p.shape;
            if (beta >= g) {
              throw std::domain_error(
                  "power-of-time exponent must be below the Pareto shape");
            }
            const double tail = std::isinf(t) ? 0.0 : std::pow(t / p.scale, beta - g);
            return g * std::pow(p.scale, beta) / (g - beta) * (1.0 - tail);
          },
          [&](const Exponential& e) {
            if (beta == 0.0) return completion_cdf(spec, t);
            // E[X^b 1{X <= t}] = lambda^-b * lower incomplete gamma(b + 1, lambda t)
            const double value = std::pow(e.rate, -beta) * boost::math::tgamma_lower(beta + 1.0, e.rate * t);
            if (!std::isfinite(value)) {
              throw NumericalError(fmt::format("E[X^{} 1{{X <= {}}}] is not finite", beta, t));
            }
            return value;
          },
          [&](const Deterministic& d) { return d.value <= t ? std::pow(d.value, beta) : 0.0; },
          [&](const Empirical& e) {
            double sum = 0.0;
            for (double x : e.samples) {
              if (x <= t) sum += std::pow(x, beta);
            }
            return sum / static_cast<double>(e.samples.size());
          },
      },
      spec);
}

}  // namespace

Pareto::Pareto(double scale_, double shape_) : scale(scale_), shape(shape_) {
  require_positive(scale, "pareto scale");
  require_positive(shape, "pareto shape");
}

Exponential::Exponential(double rate_) : rate(rate_) { require_positive(rate, "exponential rate"); }

Deterministic::Deterministic(double value_) : value(value_) {
  require_positive(value, "deterministic completion time");
}

Empirical::Empirical(std::vector<double> samples_) : samples(std::move(samples_)) {
  if (samples.empty()) throw std::invalid_argument("empirical sample list is empty");
  for (double x : samples) require_positive(x, "empirical completion time");
}

PowerOfTime::PowerOfTime(double exponent_) : exponent(exponent_) {
  require_nonnegative(exponent, "power-of-time exponent");
}

ConstantReward::ConstantReward(double value_) : value(value_) {
  require_nonnegative(value, "constant reward");
}

ScaledUniform::ScaledUniform(double lo_, double hi_) : lo(lo_), hi(hi_) {
  require_nonnegative(lo, "uniform reward lower bound");
  require_nonnegative(hi, "uniform reward upper bound");
  if (hi < lo) throw std::invalid_argument("uniform reward bounds are reversed");
}

GroupModel::GroupModel(CompletionSpec completion, RewardSpec reward, std::string label)
    : completion_(std::move(completion)), reward_(std::move(reward)), label_(std::move(label)) {
  const auto* pareto = std::get_if<Pareto>(&completion_);
  const auto* power = std::get_if<PowerOfTime>(&reward_);
  if (pareto != nullptr && power != nullptr && power->exponent >= pareto->shape) {
    throw std::invalid_argument(fmt::format(
        "power-of-time exponent {} must be below the Pareto shape {} (infinite mean reward)",
        power->exponent, pareto->shape));
  }
}

DeadlineSet::DeadlineSet(std::vector<double> deadlines) : deadlines_(std::move(deadlines)) {
  if (deadlines_.empty()) throw std::invalid_argument("deadline set is empty");
  for (std::size_t i = 0; i < deadlines_.size(); ++i) {
    if (!std::isfinite(deadlines_[i]) || !(deadlines_[i] > 0.0)) {
      throw std::invalid_argument(fmt::format("deadline {} must be finite and > 0", deadlines_[i]));
    }
    if (i > 0 && !(deadlines_[i] > deadlines_[i - 1])) {
      throw std::invalid_argument("deadlines must be strictly increasing");
    }
  }
}

std::size_t DeadlineSet::index_of(double t) const {
  auto it = std::lower_bound(deadlines_.begin(), deadlines_.end(), t);
  if (it == deadlines_.end() || *it != t) {
    throw std::out_of_range(fmt::format("{} is not in the deadline set", t));
  }
  return static_cast<std::size_t>(it - deadlines_.begin());
}

TaskSample sample_task(const GroupModel& group, CounterRng& rng) {
  const double completion = std::visit(
      overloaded{
          [&](const Pareto& p) { return p.scale * std::pow(rng.uniform_open(), -1.0 / p.shape); },
          [&](const Exponential& e) { return -std::log(rng.uniform_open()) / e.rate; },
          [&](const Deterministic& d) { return d.value; },
          [&](const Empirical& e) {
            const auto n = e.samples.size();
            auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            return e.samples[std::min(idx, n - 1)];
          },
      },
      group.completion());

  const double reward = std::visit(
      overloaded{
          [&](const PowerOfTime& p) { return std::pow(completion, p.exponent); },
          [&](const ConstantReward& c) { return c.value; },
          [&](const ScaledUniform& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
      },
      group.reward());
  return {completion, reward};
}

double mean_completion(const CompletionSpec& spec) {
  return std::visit(
      overloaded{
          [](const Pareto& p) {
            return p.shape > 1.0 ? p.shape * p.scale / (p.shape - 1.0)
                                 : std::numeric_limits<double>::infinity();
          },
          [](const Exponential& e) { return 1.0 / e.rate; },
          [](const Deterministic& d) { return d.value; },
          [](const Empirical& e) {
            return std::accumulate(e.samples.begin(), e.samples.end(), 0.0) /
                   static_cast<double>(e.samples.size());
          },
      },
      spec);
}

double completion_cdf(const CompletionSpec& spec, double t) {
  return std::visit(
      overloaded{
          [&](const Pareto& p) { return t <= p.scale ? 0.0 : 1.0 - std::pow(p.scale / t, p.shape); },
          [&](const Exponential& e) { return t <= 0.0 ? 0.0 : -std::expm1(-e.rate * t); },
          [&](const Deterministic& d) { return d.value <= t ? 1.0 : 0.0; },
          [&](const Empirical& e) {
            auto hits = std::count_if(e.samples.begin(), e.samples.end(),
                                      [t](double x) { return x <= t; });
            return static_cast<double>(hits) / static_cast<double>(e.samples.size());
          },
      },
      spec);
}

double truncated_mean_time(const CompletionSpec& spec, double t) {
  require_deadline(t);
  return std::visit(
      overloaded{
          [&](const Pareto& p) { return pareto_truncated_mean(p, t); },
          [&](const Exponential& e) { return -std::expm1(-e.rate * t) / e.rate; },
          [&](const Deterministic& d) { return std::min(d.value, t); },
          [&](const Empirical& e) {
            double sum = 0.0;
            for (double x : e.samples) sum += std::min(x, t);
            return sum / static_cast<double>(e.samples.size());
          },
      },
      spec);
}

double expected_reward(const GroupModel& group, double t) {
  require_deadline(t);
  return std::visit(
      overloaded{
          [&](const PowerOfTime& p) { return power_moment(group.completion(), p.exponent, t); },
          [&](const ConstantReward& c) { return c.value * completion_cdf(group.completion(), t); },
          [&](const ScaledUniform& u) {
            return 0.5 * (u.lo + u.hi) * completion_cdf(group.completion(), t);
          },
      },
      group.reward());
}

double reward_per_processing_time(const GroupModel& group, double t) {
  return expected_reward(group, t) / truncated_mean_time(group.completion(), t);
}

}  // namespace fairalloc
