#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracspec/coefficients.hpp"
#include "fracspec/grid.hpp"

namespace fracspec {

enum class Task {
  spectrum,
  funcalc,
  norm_equiv,
  extend,
  recover,
  energy,
  doubling,
  picard,
  viscous,
  viscosity_convergence,
  uc_probe,
  kp_check
};

std::string to_string(Task task);
/// Throws InvalidArgument for unknown names.
Task parse_task(const std::string& name);
const std::vector<Task>& all_tasks();

/// A validated run description. `task_params` holds every task parameter
/// with defaults filled in; `echo` is the canonical form of the whole file.
struct RunConfig {
  int dim = 1;
  int n = 64;
  double half_length = 8.0;
  Boundary boundary = Boundary::dirichlet;
  CoefficientKind coefficient_kind = CoefficientKind::identity;
  CoefficientParams coefficient_params;
  std::string table_path;
  std::vector<double> alphas;
  Task task = Task::spectrum;
  nlohmann::ordered_json task_params;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  /// Directory relative paths are resolved against (the config's directory).
  std::filesystem::path base_dir;
  nlohmann::ordered_json echo;

  std::filesystem::path resolve(const std::string& path) const;
};

/// Strict YAML parsing: unknown keys, missing keys, type mismatches and
/// out-of-range values raise ConfigError with the key path and line.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir = std::filesystem::path("."));

/// Canonical YAML of a parsed config; parsing it again yields the same echo.
std::string echo_yaml(const RunConfig& config);

/// Human-readable reference of every key, its type and default.
std::string config_reference();

}  // namespace fracspec
