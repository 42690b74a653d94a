#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fracspec/config.hpp"
#include "fracspec/error.hpp"
#include "fracspec/runner.hpp"

namespace {

int load(const std::string& path, fracspec::RunConfig& out) {
  try {
    out = fracspec::parse_config(path);
    return fracspec::exit_success;
  } catch (const std::exception& e) {
    std::cerr << "fracspec: " << e.what() << "\n";
    return fracspec::exit_config_error;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral fractional powers of divergence-form operators on a box"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 invariant failure, 2 config error, 3 numerical error.\n"
             "Threads: FRACSPEC_THREADS (default: all cores).\n\n" +
             fracspec::config_reference());

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the task described by a YAML config");
  run->add_option("config", config_path, "Path to the YAML config")->required();
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Do not print the invariant table");

  auto* validate = app.add_subcommand("validate", "Parse a config and print its canonical echo");
  validate->add_option("config", config_path, "Path to the YAML config")->required();

  auto* version = app.add_subcommand("version", "Print library and toolchain versions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fracspec::exit_config_error;
  }

  if (version->parsed()) {
    std::cout << fracspec::version_info().dump(2) << "\n";
    return 0;
  }

  fracspec::RunConfig cfg;
  if (const int rc = load(config_path, cfg); rc != 0) return rc;

  if (validate->parsed()) {
    std::cout << fracspec::echo_yaml(cfg);
    return 0;
  }

  const auto result = fracspec::run(cfg);
  if (!quiet) {
    for (const auto& inv : result.invariants)
      std::cout << (inv.passed ? "PASS " : "FAIL ") << inv.name << " = " << inv.value << " ("
                << inv.relation << " " << inv.threshold << ")\n";
  }
  const auto& err = result.manifest["error"];
  if (!err.is_null()) std::cerr << "fracspec: " << err["type"].get<std::string>() << ": "
                                << err["message"].get<std::string>() << "\n";
  std::cout << "status: " << result.manifest["status"].get<std::string>() << "  ("
            << (result.output_dir / "manifest.json").string() << ")\n";
  return result.exit_code;
}
