#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fairalloc {

struct ConfigIssue {
  std::string path;  ///< e.g. "groups[0].completion.pareto.shape"
  std::string message;
};

/// Raised when an experiment configuration fails validation. Carries every
/// problem found, each tagged with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  ConfigError(std::string path, std::string message)
      : ConfigError(std::vector<ConfigIssue>{{std::move(path), std::move(message)}}) {}

  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }
  const std::string& path() const noexcept { return issues_.front().path; }

 private:
  static std::string join(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += '\n';
      out += issue.path.empty() ? issue.message : issue.path + ": " + issue.message;
    }
    return out;
  }

  std::vector<ConfigIssue> issues_;
};

/// A solver failed to converge or produced a non-finite result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A group whose reward per processing time is zero at every deadline.
class NoRewardError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace fairalloc
