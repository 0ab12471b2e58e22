#pragma once

// CSV and console output. CSV bodies are deterministic: numbers use the
// shortest representation that round-trips.

#include <optional>
#include <ostream>
#include <string>

#include "fairalloc/environment.hpp"
#include "fairalloc/offline.hpp"
#include "fairalloc/sim.hpp"

namespace fairalloc {

inline constexpr const char* kOfflineHeader = "group,t_star,r_star,mu_star,phi,selection,lambda,utility_rate";
inline constexpr const char* kSummaryHeader =
    "policy,alpha,B,V,trials,group,mean_time_share,se_time_share,mean_reward_rate,se_reward_rate,utility,regret";
inline constexpr const char* kRegretHeader = "B,V,regret,stderr,slope_fit";
inline constexpr const char* kMomentsHeader = "group,t,mu,theta,rate";

void write_offline_csv(std::ostream& out, const Environment& env, const OfflineSolution& solution);
void print_offline_table(std::ostream& out, const Environment& env, const OfflineSolution& solution);

/// One row per group. `V` is empty for non-OLUM policies.
void write_summary_csv(std::ostream& out, const Environment& env, const McSummary& summary,
                       const std::string& policy, double alpha, std::optional<double> V);
void print_summary(std::ostream& out, const Environment& env, const McSummary& summary,
                   const std::string& policy);

/// One row per budget, then a final "slope" row carrying the fitted exponent.
void write_regret_csv(std::ostream& out, const RegretCurve& curve);

void write_moments_csv(std::ostream& out, const Environment& env);

/// Streams per-task rows: task,group,deadline,elapsed,reward,Q_1..Q_K,gamma_1..gamma_K.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, std::size_t groups);
  void operator()(const TraceRow& row);

 private:
  std::ostream* out_;
};

}  // namespace fairalloc
