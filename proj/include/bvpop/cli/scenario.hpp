#pragma once

#include <filesystem>
#include <string>

#include "bvpop/cli/config.hpp"

namespace bvpop::cli {

enum ExitCode : int { kExitOk = 0, kExitPropertyFailure = 1, kExitError = 2 };

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
  std::string headline;  // one-line human summary
};

/// Executes the scenario and writes <output_path>/<name>.csv and
/// <output_path>/<name>.summary.json. Library errors propagate.
RunResult run_scenario(const ScenarioConfig& config);

/// Single-line JSON error record for the diagnostic stream.
std::string error_record(const std::exception& e);

/// Exit code for an exception escaping run_scenario or load_config.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace bvpop::cli
