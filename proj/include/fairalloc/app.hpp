#pragma once

// Subcommand dispatch shared by the command-line tool and the tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "fairalloc/config.hpp"

namespace fairalloc {

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitConfig = 2, kExitNumerical = 3 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
};

/// Runs `offline`, `simulate`, `regret` or `moments`. CSV files land in
/// out_dir; the human-readable report goes to `out`, diagnostics to `err`.
/// Never throws for config, numerical or I/O failures; returns the exit code.
int run_command(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options,
                std::ostream& out, std::ostream& err);

/// Parses the file, then runs the subcommand.
int run_command_file(const std::string& subcommand, const std::filesystem::path& config_path,
                     const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace fairalloc
