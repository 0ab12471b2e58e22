#pragma once

#include <stdexcept>
#include <vector>

#include "fairalloc/distributions.hpp"
#include "fairalloc/utility.hpp"

namespace fairalloc {

/// Everything that defines an allocation problem: the groups, their
/// utilities, and the admissible deadlines.
struct Environment {
  Environment(std::vector<GroupModel> groups_, std::vector<UtilitySpec> utilities_,
              DeadlineSet deadlines_)
      : groups(std::move(groups_)), utilities(std::move(utilities_)), deadlines(std::move(deadlines_)) {
    if (groups.empty()) throw std::invalid_argument("environment has no groups");
    if (groups.size() != utilities.size()) {
      throw std::invalid_argument("one utility per group is required");
    }
  }

  std::size_t num_groups() const noexcept { return groups.size(); }

  std::vector<GroupModel> groups;
  std::vector<UtilitySpec> utilities;
  DeadlineSet deadlines;
};

}  // namespace fairalloc
