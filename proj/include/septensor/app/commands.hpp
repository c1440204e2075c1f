#pragma once

// The five CLI commands. Each validates the whole configuration before it
// creates the output directory, then writes its artifacts and a manifest.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "septensor/app/config.hpp"

namespace septensor::app {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3 };

struct RunOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

/// Files written by a command, relative to the output directory.
struct RunOutputs {
  std::string out_dir;
  std::vector<std::string> files;
};

/// Applies a seed to the config and every sub-config.
void apply_seed(AppConfig& cfg, std::uint64_t seed);

RunOutputs cmd_solve(const AppConfig& cfg, const std::string& out_dir, std::ostream& log);
RunOutputs cmd_train(const AppConfig& cfg, const std::string& out_dir, std::ostream& log);
RunOutputs cmd_invert(const AppConfig& cfg, const std::string& out_dir, std::ostream& log);
RunOutputs cmd_study(const AppConfig& cfg, const std::string& out_dir, std::ostream& log);
RunOutputs cmd_oracle(const AppConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Loads the config, dispatches, and maps errors to exit codes with a
/// message on `err`.
int run_command(const std::string& command, const RunOptions& opts, std::ostream& log,
                std::ostream& err);

/// Hex CRC-32 of the config text.
std::string config_hash(const AppConfig& cfg);

}  // namespace septensor::app
