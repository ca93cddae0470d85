#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace sdecmp {

enum ExitCode : int {
  kExitPass = 0,
  kExitUsage = 1,
  kExitNovikov = 2,
  kExitHypothesis = 3,
  kExitProperty = 4,
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> output;
  bool allow_warn = false;   // compare: proceed on a Novikov warn verdict
  std::string inject_fault;  // selftest: "weights" corrupts the Girsanov weights
};

// Each command writes <output>/manifest.json first, then reports/ and csv/,
// prints a short summary to `out` and returns the exit code. Configuration
// problems throw ConfigError; run_cli maps exceptions to exit codes.
int cmd_novikov(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
int cmd_simulate(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
int cmd_envelope(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
int cmd_compare(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
int cmd_linear_bound(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
int cmd_scaling(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
/// Without a config, runs on tanh drift in 1D at x0 = 0.3 with 10^4 paths.
int cmd_selftest(const std::optional<std::filesystem::path>& config, const RunOptions& options,
                 std::ostream& out);

/// Parses arguments and dispatches to a command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sdecmp
