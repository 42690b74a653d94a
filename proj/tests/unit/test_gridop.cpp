#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fracspec/coefficients.hpp"
#include "fracspec/discrete_operator.hpp"
#include "fracspec/error.hpp"
#include "fracspec/grid.hpp"

using namespace fracspec;

TEST_CASE("grid: dirichlet 1D nodes and interior dofs") {
  const Grid g = build_grid(1, 5, 2.0, Boundary::dirichlet);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.node_count() == 5);
  CHECK(g.dof_count() == 3);
  for (int i = 0; i < 5; ++i) CHECK(g.coordinate(i) == doctest::Approx(-2.0 + i));
  CHECK(g.dof_position(0)[0] == doctest::Approx(-1.0));
  CHECK(g.dof_position(1)[0] == doctest::Approx(0.0));
  CHECK(g.dof_position(2)[0] == doctest::Approx(1.0));
}

TEST_CASE("grid: periodic excludes the duplicate endpoint") {
  const Grid g = build_grid(1, 4, 2.0, Boundary::periodic);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.dof_count() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(g.dof_position(i)[0] == doctest::Approx(-2.0 + i));
  CHECK(g.wrap(4) == 0);
  CHECK(g.wrap(-1) == 3);
}

TEST_CASE("grid: 2D dirichlet counts") {
  const Grid g = build_grid(2, 8, 1.0, Boundary::dirichlet);
  CHECK(g.node_count() == 64);
  CHECK(g.dof_count() == 36);
  // x runs fastest
  CHECK(g.dof_axes(1)[0] == 2);
  CHECK(g.dof_axes(1)[1] == 1);
}

TEST_CASE("grid: invalid arguments") {
  CHECK_THROWS_AS(build_grid(3, 8, 1.0, Boundary::dirichlet), InvalidArgument);
  CHECK_THROWS_AS(build_grid(1, 2, 1.0, Boundary::dirichlet), InvalidArgument);
  CHECK_THROWS_AS(build_grid(1, 8, 0.0, Boundary::dirichlet), InvalidArgument);
  CHECK_THROWS_AS(build_grid(1, 8, -1.0, Boundary::periodic), InvalidArgument);
  CHECK_THROWS_AS(parse_boundary("neumann"), InvalidArgument);
}

TEST_CASE("coefficients: identity field") {
  const Grid g = build_grid(2, 6, 1.0, Boundary::dirichlet);
  const auto f = make_coefficients(g, CoefficientKind::identity);
  CHECK(f.lambda() == doctest::Approx(1.0));
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    CHECK(f.a(n, 0, 0) == 1.0);
    CHECK(f.a(n, 0, 1) == 0.0);
    CHECK(f.c(n) == 0.0);
  }
  const auto r = check_hypotheses(f);
  CHECK(r.ok());
  for (const auto& [radius, dev] : r.flatness_profile) CHECK(dev == 0.0);
}

TEST_CASE("coefficients: positive bump keeps lambda at 1") {
  const Grid g = build_grid(2, 17, 4.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = 0.5;
  p.width = 1.0;
  const auto f = make_coefficients(g, CoefficientKind::radial_bump, p);
  CHECK(f.lambda() == doctest::Approx(1.0).epsilon(1e-12));
  // centre node carries 1 + 0.5
  const auto centre = g.node_index({8, 8});
  CHECK(f.a(centre, 0, 0) == doctest::Approx(1.5));
  CHECK(f.a(centre, 1, 1) == doctest::Approx(1.5));
}

TEST_CASE("coefficients: ellipticity violation names the origin") {
  const Grid g = build_grid(1, 9, 2.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = -2.0;
  p.width = 1.0;
  try {
    make_coefficients(g, CoefficientKind::radial_bump, p);
    FAIL("expected CoefficientError");
  } catch (const CoefficientError& e) {
    // the most negative node is x = 0, node 4
    CHECK(e.node() == 4);
  }
}

TEST_CASE("coefficients: flatness at R = 4 on a 1D box of half length 8") {
  const Grid g = build_grid(1, 65, 8.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = 0.5;
  p.width = 1.0;
  const auto r = check_hypotheses(make_coefficients(g, CoefficientKind::radial_bump, p));
  REQUIRE(r.flatness_profile.size() == 3);
  CHECK(r.flatness_profile[1].first == doctest::Approx(4.0));
  CHECK(r.flatness_profile[1].second == doctest::Approx(0.5 * std::exp(-16.0)).epsilon(1e-10));
  CHECK(r.flatness_profile[0].second >= r.flatness_profile[1].second);
  CHECK(r.flatness_profile[1].second >= r.flatness_profile[2].second);
}

TEST_CASE("coefficients: asymmetric tabulated node is reported") {
  const Grid g = build_grid(2, 4, 1.0, Boundary::dirichlet);
  std::vector<double> a;
  for (std::size_t n = 0; n < g.node_count(); ++n) a.insert(a.end(), {1.0, 0.0, 0.0, 1.0});
  a[5 * 4 + 1] = 0.3;
  const CoefficientField f(g, CoefficientKind::tabulated, {}, a,
                           std::vector<double>(g.node_count(), 0.0));
  const auto r = check_hypotheses(f);
  CHECK_FALSE(r.symmetric);
  REQUIRE(r.asymmetric_node.has_value());
  CHECK(*r.asymmetric_node == 5);
  CHECK_THROWS_AS(validate(f), CoefficientError);
}

TEST_CASE("coefficients: negative c is reported") {
  const Grid g = build_grid(1, 6, 1.0, Boundary::dirichlet);
  std::vector<double> c(g.node_count(), 0.0);
  c[2] = -0.1;
  const CoefficientField f(g, CoefficientKind::tabulated, {}, std::vector<double>(g.node_count(), 1.0), c);
  const auto r = check_hypotheses(f);
  CHECK_FALSE(r.c_nonnegative);
  CHECK(*r.negative_c_node == 2);
}

TEST_CASE("coefficients: table round trip") {
  const Grid g = build_grid(2, 7, 2.0, Boundary::periodic);
  CoefficientParams p;
  p.scale = 0.4;
  p.shape = {1.0, 0.3, 0.3, 0.5};
  p.c_amplitude = 0.7;
  const auto f = make_coefficients(g, CoefficientKind::radial_bump, p);
  const auto path = std::filesystem::temp_directory_path() / "fracspec_table_roundtrip.csv";
  save_coefficient_table(f, path);
  const auto back = load_coefficient_table(g, path);
  CHECK(back.a_table() == f.a_table());
  CHECK(back.c_table() == f.c_table());
  std::filesystem::remove(path);
}

TEST_CASE("assemble: classical stencil for a = 1") {
  const Grid g = build_grid(1, 5, 2.0, Boundary::dirichlet);
  const auto op = assemble(g, make_coefficients(g, CoefficientKind::identity));
  Eigen::MatrixXd expected(3, 3);
  expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  CHECK((op.dense() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble: face averages of a(x) = 1 + x^2") {
  const Grid g = build_grid(1, 5, 2.0, Boundary::dirichlet);
  std::vector<double> a;
  for (int i = 0; i < 5; ++i) {
    const double x = g.coordinate(i);
    a.push_back(1.0 + x * x);
  }
  const CoefficientField f(g, CoefficientKind::tabulated, {}, a, std::vector<double>(5, 0.0));
  // faces: a(-3/2) = (5+2)/2, a(-1/2) = (2+1)/2, symmetric on the right
  const double fo = 3.5, fi = 1.5;
  Eigen::MatrixXd expected(3, 3);
  expected << fo + fi, -fi, 0, -fi, 2 * fi, -fi, 0, -fi, fi + fo;
  const auto op = assemble(g, f);
  CHECK((op.dense() - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assemble: periodic 1D wraps") {
  const Grid g = build_grid(1, 4, 2.0, Boundary::periodic);
  const auto K = assemble(g, make_coefficients(g, CoefficientKind::identity)).dense();
  CHECK(K(0, 3) == -1.0);
  CHECK(K(3, 0) == -1.0);
  CHECK(K(0, 0) == 2.0);
  CHECK(K.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assemble: c = 1 adds the identity") {
  const Grid g = build_grid(2, 7, 2.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = 0.3;
  p.shape = {1.0, 0.4, 0.4, 1.0};
  const auto op0 = assemble(g, make_coefficients(g, CoefficientKind::radial_bump, p));
  p.c_offset = 1.0;
  const auto op1 = assemble(g, make_coefficients(g, CoefficientKind::radial_bump, p));
  const Eigen::MatrixXd diff = op1.dense() - op0.dense();
  CHECK((diff - Eigen::MatrixXd::Identity(diff.rows(), diff.cols())).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("assemble: grid mismatch") {
  const Grid g = build_grid(1, 5, 2.0, Boundary::dirichlet);
  const Grid other = build_grid(1, 6, 2.0, Boundary::dirichlet);
  CHECK_THROWS_AS(assemble(other, make_coefficients(g, CoefficientKind::identity)), InvalidArgument);
}

namespace {

CoefficientParams random_params(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CoefficientParams p;
  p.width = 0.5 + std::abs(u(rng));
  p.scale = 0.9 * u(rng);
  if (dim == 2) {
    // symmetric shape with spectral radius <= 1 keeps a(x) elliptic
    const double d0 = u(rng), d1 = u(rng), o = u(rng);
    const double rad = std::max({std::abs(d0) + std::abs(o), std::abs(d1) + std::abs(o), 1e-3});
    p.shape = {d0 / rad, o / rad, o / rad, d1 / rad};
  }
  p.c_amplitude = std::abs(u(rng));
  p.c_width = 0.5 + std::abs(u(rng));
  return p;
}

}  // namespace

TEST_CASE("property: assembled matrices are exactly symmetric (1000 random fields)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + trial % 2;
    const Boundary b = (trial / 2) % 2 ? Boundary::periodic : Boundary::dirichlet;
    const Grid g = build_grid(dim, dim == 1 ? 12 : 6, 1.5, b);
    const auto op = assemble(g, make_coefficients(g, CoefficientKind::radial_bump, random_params(rng, dim)));
    const Eigen::MatrixXd K = op.dense();
    REQUIRE((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("property: quadratic form is nonnegative") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + trial % 2;
    const Grid g = build_grid(dim, dim == 1 ? 20 : 8, 2.0, trial % 3 ? Boundary::dirichlet : Boundary::periodic);
    const auto op = assemble(g, make_coefficients(g, CoefficientKind::radial_bump, random_params(rng, dim)));
    Eigen::VectorXd u(static_cast<Eigen::Index>(g.dof_count()));
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = n01(rng);
    const double q = u.dot(op.apply(u));
    CHECK(q >= -1e-10 * op.max_abs_entry() * u.squaredNorm());
  }
}

TEST_CASE("property: flatness profile is nonincreasing for bumps") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 2;
    const Grid g = build_grid(dim, dim == 1 ? 41 : 15, 4.0, Boundary::dirichlet);
    const auto r = check_hypotheses(make_coefficients(g, CoefficientKind::radial_bump, random_params(rng, dim)));
    for (std::size_t k = 1; k < r.flatness_profile.size(); ++k)
      CHECK(r.flatness_profile[k].second <= r.flatness_profile[k - 1].second);
  }
}

TEST_CASE("gershgorin holds without mixed terms") {
  const Grid g = build_grid(2, 9, 2.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = 0.8;
  const auto op = assemble(g, make_coefficients(g, CoefficientKind::radial_bump, p));
  CHECK(op.gershgorin_nonnegative());
}
