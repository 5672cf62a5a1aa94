#pragma once

#include "nonloc/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nonloc {

inline constexpr int kSchemaVersion = 1;

/// Exit-code contract shared by the CLI: 0 all checks passed, 1 a
/// mathematical check failed (reports are still written), 2 configuration or
/// usage error.
enum ExitCode { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

struct CommandResult {
  int exit_code = kExitPass;
  nlohmann::json report;            // what was written to the JSON file, if any
  std::vector<std::string> files;   // written paths
  std::vector<std::string> failures;
};

/// Each command writes its outputs into out_dir (created if missing).
CommandResult cmd_effective(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_constants(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_dispersion(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_verify(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Dispatch by name; throws ConfigError for an unknown command.
CommandResult run_command(const std::string& name, const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace nonloc
