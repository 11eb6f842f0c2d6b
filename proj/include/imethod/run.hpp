#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "imethod/io.hpp"
#include "imethod/verification.hpp"

namespace imethod {

enum class Command { evolve, sweep, check, norms };

std::optional<Command> parse_command(std::string_view name);
std::string to_string(Command command);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverAbort = 3;
inline constexpr int kExitIoError = 4;

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path run_dir;
  std::vector<std::string> warnings;
  std::vector<CheckReport> reports;
};

/// <output_dir>/<command>-<config hash>
std::filesystem::path run_directory(Command command, const RunConfig& cfg);

/// Executes one check from the config against u0. Unknown names raise ConfigError.
CheckReport run_check(const CheckSpec& spec, const RunConfig& cfg, const Field& u0);

/// Runs a subcommand and writes its artifacts. Exceptions propagate.
RunOutcome run(Command command, const RunConfig& cfg, std::ostream& log);

struct CliOptions {
  std::string command;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

/// Loads the config, applies the overrides, runs, and maps errors to exit codes.
int execute(const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace imethod
