#pragma once

// Alpha-fair utility family U(x) = w x^(1-alpha) / (1-alpha), with the
// logarithm at alpha = 1 and the linear utility at alpha = 0.

namespace fairalloc {

/// Rate substituted for a zero rate when alpha >= 1 makes U(0) undefined.
inline constexpr double kRateFloor = 1e-9;

struct FlooredUtility {
  double value;
  bool floored;
};

class UtilitySpec {
 public:
  UtilitySpec(double alpha, double weight);

  double alpha() const noexcept { return alpha_; }
  double weight() const noexcept { return weight_; }
  bool is_linear() const noexcept { return alpha_ == 0.0; }
  bool is_log() const noexcept { return alpha_ == 1.0; }

  /// U(x). x = 0 is allowed only when alpha < 1.
  double value(double x) const;

  /// U(x), substituting kRateFloor for x <= 0 when alpha >= 1.
  FlooredUtility value_floored(double x) const;

  /// U'(x) = w x^-alpha.
  double marginal(double x) const;

  /// (U')^{-1}(y) = (w / y)^(1/alpha). Throws std::domain_error for the linear
  /// utility, whose marginal is constant and has no unique inverse.
  double inverse_marginal(double y) const;

 private:
  double alpha_;
  double weight_;
};

}  // namespace fairalloc
