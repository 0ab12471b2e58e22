#pragma once

// Offline optimum over stationary randomized policies (SRPs): per-group
// optimal deadlines, the time fractions that maximize total utility, and the
// selection probabilities that realize those fractions.

#include <cstddef>
#include <span>
#include <vector>

#include "fairalloc/distributions.hpp"
#include "fairalloc/environment.hpp"
#include "fairalloc/utility.hpp"

namespace fairalloc {

struct GroupStats {
  std::size_t group_index = 0;
  double t_star = 0.0;      ///< deadline maximizing reward per processing time
  double r_star = 0.0;      ///< theta_star / mu_star
  double mu_star = 0.0;     ///< E[min{X, t_star}]
  double theta_star = 0.0;  ///< E[R(t_star)]
};

struct FractionSolution {
  std::vector<double> phi;
  double lambda = 0.0;
  bool floored = false;  ///< some group had zero reward and got phi = 0
};

struct OfflineSolution {
  std::vector<GroupStats> stats;
  std::vector<double> phi;        ///< time share per group
  std::vector<double> selection;  ///< probability of picking each group (at its t_star)
  double lambda = 0.0;
  double utility_rate = 0.0;
  bool floored = false;
};

/// Scans the deadline set for the largest expected_reward / truncated_mean_time,
/// breaking ties toward the smaller deadline. Throws NoRewardError when every
/// ratio is zero.
GroupStats optimal_deadline(const GroupModel& group, const DeadlineSet& deadlines,
                            std::size_t group_index = 0);

/// Solves phi_k = (1/r_k) (U_k')^{-1}(lambda / r_k) with sum(phi) = 1 by
/// bisection on lambda. Utilities may have different alphas but all must be
/// > 0. Groups with r_star = 0 are excluded and get phi = 0.
FractionSolution solve_fractions(std::span<const UtilitySpec> utilities,
                                 std::span<const GroupStats> stats);

/// Closed-form optimum for a common alpha. alpha = 0 puts all time on the
/// group with the largest w_k r_k (ties to the smallest index).
OfflineSolution alpha_fair_closed_form(double alpha, std::span<const UtilitySpec> utilities,
                                       std::span<const GroupStats> stats);

/// Converts time shares into per-task selection probabilities:
/// selection_k proportional to phi_k / mu_star_k.
std::vector<double> selection_from_fractions(std::span<const double> phi,
                                             std::span<const GroupStats> stats);

/// Full solve: optimal deadlines, then the closed form when every group shares
/// one alpha, otherwise bisection.
OfflineSolution solve_offline(const Environment& env);

/// Truncated moments for every (group, deadline) pair.
struct MomentTable {
  std::vector<std::vector<double>> mu;     ///< [k][l] = E[min{X_k, t_l}]
  std::vector<std::vector<double>> theta;  ///< [k][l] = E[R_k(t_l)]
};

MomentTable moment_table(std::span<const GroupModel> groups, const DeadlineSet& deadlines);

/// Probability distribution over (group, deadline index).
class SrpDistribution {
 public:
  /// Rows are groups, columns deadlines. Entries must be >= 0 and sum to 1
  /// within 1e-9.
  explicit SrpDistribution(std::vector<std::vector<double>> probabilities);

  /// Puts probability selection_k on (k, t_star_k).
  static SrpDistribution from_solution(const OfflineSolution& solution, const DeadlineSet& deadlines);

  std::size_t num_groups() const noexcept { return p_.size(); }
  std::size_t num_deadlines() const noexcept { return p_.front().size(); }
  double operator()(std::size_t k, std::size_t l) const { return p_[k][l]; }

 private:
  std::vector<std::vector<double>> p_;
};

struct SrpEvaluation {
  std::vector<double> rates;  ///< long-run reward per unit time for each group
  double utility = 0.0;
  bool floored = false;
};

/// Long-run per-group reward rate of an SRP and the resulting total utility.
SrpEvaluation utility_rate_of_srp(const SrpDistribution& p, const MomentTable& moments,
                                  std::span<const UtilitySpec> utilities);

SrpEvaluation utility_rate_of_srp(const SrpDistribution& p, const Environment& env);

}  // namespace fairalloc
