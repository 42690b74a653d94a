#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fracspec/config.hpp"
#include "fracspec/error.hpp"
#include "fracspec/runner.hpp"

using namespace fracspec;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("fracspec_runner_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string grid_block(int n, double x, const char* boundary, const char* kind) {
  std::ostringstream s;
  s << "grid:\n  dim: 1\n  n: " << n << "\n  half_length: " << x << "\n  boundary: " << boundary
    << "\ncoefficients:\n  kind: " << kind << "\n";
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("exit codes by exception type") {
  CHECK(exit_code_for(ConfigError("x", "k")) == exit_config_error);
  CHECK(exit_code_for(InvalidArgument("x")) == exit_config_error);
  CHECK(exit_code_for(CoefficientError("x", 3)) == exit_config_error);
  CHECK(exit_code_for(NumericalError("x")) == exit_numerical_error);
  CHECK(exit_code_for(ConvergenceError("x", {1.0})) == exit_numerical_error);
  CHECK(exit_code_for(std::runtime_error("x")) == exit_numerical_error);
  CHECK(exit_success == 0);
  CHECK(exit_invariant_failure == 1);
}

TEST_CASE("version info") {
  const auto v = version_info();
  for (const char* k : {"fracspec", "eigen", "lapack", "compiler", "cxx_standard"}) CHECK(v.contains(k));
}

TEST_CASE("norm_equiv writes the eigenvector bracket") {
  TempDir dir("norm");
  const auto cfg = parse_config_text(grid_block(32, 4.0, "periodic", "identity") +
                                         "alpha: [0.5, 1.5]\ntask: norm_equiv\n",
                                     dir.path);
  const auto r = run(cfg);
  CHECK(r.exit_code == exit_success);
  const auto j = json::parse(slurp(r.output_dir / "norm_equiv.json"));
  REQUIRE(j["eigenvector_brackets"].size() == 2);
  for (const auto& b : j["eigenvector_brackets"]) {
    CHECK(b["ratio_min"].get<double>() >= b["lower"].get<double>() - 1e-9);
    CHECK(b["ratio_max"].get<double>() <= b["upper"].get<double>() + 1e-9);
  }
  CHECK(j["eigenvector_brackets"][1]["lower"].get<double>() == doctest::Approx(std::pow(2.0, -0.5)));
}

TEST_CASE("uc_probe sweep ends in an exact zero") {
  TempDir dir("uc");
  const auto cfg = parse_config_text(grid_block(64, 4.0, "dirichlet", "identity") +
                                         "alpha: [0.5, 1.0]\ntask: uc_probe\ntask_params:\n"
                                         "  theta: [[-3.0, -1.0]]\n  support: [[0.5, 2.5]]\n",
                                     dir.path);
  const auto r = run(cfg);
  CHECK(r.exit_code == exit_success);
  std::ifstream in(r.output_dir / "uc_sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "alpha,mass_theta,mass_total,ratio");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1].substr(rows[1].rfind(',') + 1)) == 0.0);
  CHECK(r.manifest["invariants_passed"] == true);
  const auto uc = json::parse(slurp(r.output_dir / "uc_probe.json"));
  CHECK(uc.contains("boundary_check"));
}

TEST_CASE("manifest layout and determinism") {
  TempDir dir("det");
  const std::string text = grid_block(32, 4.0, "dirichlet", "radial_bump") +
                           "  params:\n    scale: 0.5\nalpha: [0.5]\ntask: picard\ntask_params:\n"
                           "  T: 0.02\n  dt: 0.002\noutput_dir: ";
  const auto a = run(parse_config_text(text + "a\n", dir.path));
  const auto b = run(parse_config_text(text + "b\n", dir.path));
  REQUIRE(a.exit_code == exit_success);
  for (const char* k : {"config", "versions", "seed", "task", "wall_time_seconds", "status", "exit_code",
                        "invariants_passed", "invariants", "summary", "outputs"})
    CHECK(a.manifest.contains(k));
  CHECK(a.manifest["task"] == "picard");
  CHECK(fs::exists(a.output_dir / "manifest.json"));
  for (const auto& f : a.manifest["outputs"]) {
    const auto name = f.get<std::string>();
    CHECK(slurp(a.output_dir / name) == slurp(b.output_dir / name));
  }
  CHECK(a.manifest["invariants"] == b.manifest["invariants"]);
  CHECK(a.manifest["summary"] == b.manifest["summary"]);
}

TEST_CASE("non-finite numbers are written as strings") {
  TempDir dir("inf");
  const auto cfg = parse_config_text(grid_block(16, 4.0, "dirichlet", "identity") +
                                         "alpha: 0.5\ntask: picard\ntask_params:\n  T: 0.01\n  dt: 0.005\n"
                                         "  initial:\n    amplitude: 0.0\n",
                                     dir.path);
  const auto r = run(cfg);
  const auto j = json::parse(slurp(r.output_dir / "picard.json"));
  CHECK(j["0.5"]["T_star"] == "inf");
}

TEST_CASE("errors are serialized in the manifest") {
  TempDir dir("err");
  const auto cfg = parse_config_text(grid_block(32, 4.0, "dirichlet", "identity") +
                                         "alpha: 0.5\ntask: picard\ntask_params:\n  T: 2.0\n  dt: 0.01\n"
                                         "  max_iter: 4\n  initial:\n    amplitude: 3.0\n",
                                     dir.path);
  const auto r = run(cfg);
  CHECK(r.exit_code == exit_numerical_error);
  CHECK(r.manifest["status"] == "numerical_error");
  CHECK(r.manifest["error"]["type"] == "convergence_error");
  CHECK(r.manifest["error"]["history"].size() == 4);
  const auto disk = json::parse(slurp(r.output_dir / "manifest.json"));
  CHECK(disk["exit_code"] == exit_numerical_error);
}

TEST_CASE("failed invariants give exit code 1") {
  TempDir dir("inv");
  const auto cfg = parse_config_text(grid_block(128, 4.0, "dirichlet", "radial_bump") +
                                         "  params:\n    scale: 0.5\n    width: 2.0\nalpha: 0.5\ntask: funcalc\n"
                                         "task_params:\n  samples: 4\n",
                                     dir.path);
  const auto r = run(cfg);
  CHECK(r.exit_code == exit_invariant_failure);
  bool found = false;
  for (const auto& inv : r.invariants)
    if (inv.name == "smoothing_equality_gap") found = !inv.passed;
  CHECK(found);
}
