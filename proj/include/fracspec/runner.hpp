#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracspec/config.hpp"

namespace fracspec {

/// Process exit codes of `fracspec run`.
enum ExitCode : int {
  exit_success = 0,
  exit_invariant_failure = 1,
  exit_config_error = 2,
  exit_numerical_error = 3,
};

/// Maps an exception to an exit code: configuration and argument errors give 2,
/// numerical failures (and anything unexpected) give 3.
int exit_code_for(const std::exception& error);

struct Invariant {
  std::string name;
  double value;
  double threshold;
  std::string relation;  ///< "<=", ">=", "<", ">" or "=="
  bool passed;
};

struct RunResult {
  int exit_code = exit_success;
  std::filesystem::path output_dir;
  std::vector<Invariant> invariants;
  /// Manifest content, also written to output_dir/manifest.json.
  nlohmann::ordered_json manifest;
};

/// Executes the configured task, writes its CSV/JSON files and manifest.json
/// into the output directory and reports the exit code. Module errors are
/// caught and serialized in the manifest.
RunResult run(const RunConfig& config);

/// Library and toolchain versions recorded in manifests.
nlohmann::ordered_json version_info();

}  // namespace fracspec
