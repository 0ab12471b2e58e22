#include "fairalloc/utility.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace fairalloc {

UtilitySpec::UtilitySpec(double alpha, double weight) : alpha_(alpha), weight_(weight) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument(fmt::format("alpha must be finite and >= 0 (got {})", alpha));
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument(fmt::format("weight must be finite and > 0 (got {})", weight));
  }
}

double UtilitySpec::value(double x) const {
  if (x < 0.0 || (x == 0.0 && alpha_ >= 1.0) || std::isnan(x)) {
    throw std::domain_error(fmt::format("utility undefined at x = {} for alpha = {}", x, alpha_));
  }
  if (is_linear()) return weight_ * x;
  if (is_log()) return weight_ * std::log(x);
  return weight_ * std::pow(x, 1.0 - alpha_) / (1.0 - alpha_);
}

FlooredUtility UtilitySpec::value_floored(double x) const {
  if (x <= 0.0 && alpha_ >= 1.0) return {value(kRateFloor), true};
  return {value(x), false};
}

double UtilitySpec::marginal(double x) const {
  if (is_linear()) return weight_;
  if (!(x > 0.0)) {
    throw std::domain_error(fmt::format("marginal utility undefined at x = {}", x));
  }
  if (is_log()) return weight_ / x;
  return weight_ * std::pow(x, -alpha_);
}

double UtilitySpec::inverse_marginal(double y) const {
  if (is_linear()) {
    throw std::domain_error("linear utility has no unique inverse marginal");
  }
  if (!(y > 0.0)) {
    throw std::domain_error(fmt::format("inverse marginal undefined at y = {}", y));
  }
  if (is_log()) return weight_ / y;
  return std::pow(weight_ / y, 1.0 / alpha_);
}

}  // namespace fairalloc
