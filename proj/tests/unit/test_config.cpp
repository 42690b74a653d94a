#include <doctest.h>

#include <filesystem>
#include <string>

#include "fracspec/config.hpp"
#include "fracspec/error.hpp"

using namespace fracspec;

namespace {

const char* kMinimal = R"(grid:
  dim: 1
  n: 32
  half_length: 4.0
  boundary: dirichlet
coefficients:
  kind: identity
alpha: 0.5
task: spectrum
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config_text(kMinimal);
  CHECK(c.dim == 1);
  CHECK(c.n == 32);
  CHECK(c.half_length == 4.0);
  CHECK(c.boundary == Boundary::dirichlet);
  CHECK(c.coefficient_kind == CoefficientKind::identity);
  REQUIRE(c.alphas.size() == 1);
  CHECK(c.alphas[0] == 0.5);
  CHECK(c.task == Task::spectrum);
  CHECK(c.seed == 1);
  CHECK(c.output_dir == "out");
  CHECK(c.task_params.at("count") == 0);
  CHECK(c.task_params.at("verify") == true);
}

TEST_CASE("alpha list") {
  const auto c = parse_config_text(replace(kMinimal, "alpha: 0.5", "alpha: [0.25, 0.5, 1]"));
  CHECK(c.alphas == std::vector<double>{0.25, 0.5, 1.0});
}

TEST_CASE("negative alpha is rejected") {
  try {
    parse_config_text(replace(kMinimal, "alpha: 0.5", "alpha: -0.5"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha must be >= 0") != std::string::npos);
    CHECK(e.key() == "alpha");
    CHECK(e.line() == 8);
  }
}

TEST_CASE("unknown keys are named") {
  try {
    parse_config_text(std::string(kMinimal) + "alhpa: 0.5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alhpa") != std::string::npos);
    CHECK(e.line() == 10);
  }
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "  n: 32", "  n: 32\n  m: 3")), ConfigError);
}

TEST_CASE("missing keys report the parent line") {
  try {
    parse_config_text(replace(kMinimal, "  n: 32\n", ""));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "grid.n");
    CHECK(e.line() >= 1);
  }
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "task: spectrum\n", "")), ConfigError);
}

TEST_CASE("type mismatches and bad values") {
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "n: 32", "n: many")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "n: 32", "n: 2.5")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "dim: 1", "dim: 3")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "dirichlet", "neumann")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "task: spectrum", "task: solve")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(replace(kMinimal, "half_length: 4.0", "half_length: -1")), ConfigError);
  CHECK_THROWS_AS(parse_config_text("grid: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::filesystem::path("/nonexistent/fracspec.yaml")), ConfigError);
}

TEST_CASE("task parameters are checked against the task") {
  const auto picard = replace(kMinimal, "task: spectrum", "task: picard\ntask_params:\n  T: 0.2\n  dt: 0.01");
  const auto c = parse_config_text(picard);
  CHECK(c.task_params.at("T") == 0.2);
  CHECK(c.task_params.at("max_iter") == 100);
  CHECK(c.task_params.at("nonlinearity").at("n1") == 3);
  CHECK_THROWS_AS(parse_config_text(replace(picard, "T: 0.2", "epsilon: 0.2")), ConfigError);
  const auto bad = replace(kMinimal, "task: spectrum",
                           "task: viscosity_convergence\ntask_params:\n  epsilons: [0.01, 0.1]");
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
}

TEST_CASE("task names round trip") {
  for (Task t : all_tasks()) CHECK(parse_task(to_string(t)) == t);
  CHECK(all_tasks().size() == 12);
  CHECK_THROWS_AS(parse_task("nope"), InvalidArgument);
}

TEST_CASE("relative paths resolve against the config directory") {
  const auto c = parse_config_text(kMinimal, "/tmp/cfg");
  CHECK(c.resolve("out") == std::filesystem::path("/tmp/cfg/out"));
  CHECK(c.resolve("/abs/out") == std::filesystem::path("/abs/out"));
}

TEST_CASE("property: parse, echo, parse is stable for every shipped config") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(FRACSPEC_TEST_CONFIGS)) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    const auto a = parse_config(entry.path());
    const auto b = parse_config_text(echo_yaml(a), entry.path().parent_path());
    CHECK(a.echo == b.echo);
    CHECK(echo_yaml(a) == echo_yaml(b));
    ++seen;
  }
  CHECK(seen > 0);
}

TEST_CASE("reference lists every task") {
  const auto ref = config_reference();
  for (Task t : all_tasks()) CHECK(ref.find("task_params for task " + to_string(t)) != std::string::npos);
}
