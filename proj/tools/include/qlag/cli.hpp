#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace qlag::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeError = 1,
  kValidationError = 2,
  kIndeterminate = 3,
};

struct SchemaKey {
  std::string_view command;
  std::string_view key;
  std::string_view type;
  std::string_view default_value;  // empty when required
  std::string_view description;
};

/// Every config key accepted by every command.
const std::vector<SchemaKey>& config_schema();
std::vector<std::string> commands();
std::vector<std::string> keys_for(std::string_view command);

/// Files produced by a command, keyed by file name, plus the exit code.
struct CommandResult {
  std::map<std::string, std::string> files;
  int exit_code = kSuccess;
};

/// Runs one command on an already merged JSON config (no file output).
/// Throws ConfigError for invalid configs.
CommandResult execute(std::string_view command, const nlohmann::json& config);

/// Full command-line entry point: parses flags, loads and overrides the
/// config, runs the command and writes artifacts into the output directory.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qlag::cli
