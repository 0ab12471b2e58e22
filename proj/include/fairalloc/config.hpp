#pragma once

// Experiment configuration: a JSON document (schema_version 1) describing the
// groups, deadlines, utilities, OLUM parameters and experiment settings.
// See README.md for the schema.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairalloc/distributions.hpp"
#include "fairalloc/environment.hpp"
#include "fairalloc/olum.hpp"

namespace fairalloc {

inline constexpr int kSchemaVersion = 1;

enum class PolicyKind { Olum, Oracle };

struct SimulateSpec {
  PolicyKind policy = PolicyKind::Olum;
  double budget = 0.0;
  std::size_t trials = 0;
};

struct RegretSpec {
  std::vector<double> budgets;
  std::size_t trials = 0;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::vector<GroupModel> groups;
  std::vector<double> deadlines;
  double alpha = 1.0;
  std::vector<double> weights;
  std::optional<SimulateSpec> simulate;
  std::optional<RegretSpec> regret;
  std::uint64_t seed = 0;
  std::optional<double> V;  ///< unset: derived from the budget
  std::size_t tau = 1;
  GammaCap gamma_cap{};
  bool truncate_last = false;
  bool trace = false;

  Environment environment() const;
  /// OLUM parameters for a run with the given budget.
  OlumParams olum_params(double budget) const;
};

/// Parses and validates; throws ConfigError listing every problem found.
ExperimentConfig parse_config_text(std::string_view text);

/// Reads a file; an unreadable file is reported as a ConfigError on path "".
ExperimentConfig parse_config(const std::filesystem::path& path);

}  // namespace fairalloc
