#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "fft_oracle.hpp"
#include "fracspec/coefficients.hpp"
#include "fracspec/discrete_operator.hpp"
#include "fracspec/error.hpp"
#include "fracspec/spectral.hpp"
#include "fracspec/ucprobe.hpp"

using namespace fracspec;

namespace {

VanishingSpec spec1d() {
  VanishingSpec s;
  s.theta = {{-3.0, 0.0}, {-1.0, 0.0}};
  s.support = {{0.5, 0.0}, {2.5, 0.0}};
  return s;
}

SpectralDecomposition decompose(const Grid& g, CoefficientKind kind = CoefficientKind::identity) {
  CoefficientParams p;
  p.scale = 0.5;
  p.width = 2.0;
  return eigendecompose(assemble(g, make_coefficients(g, kind, p)));
}

}  // namespace

TEST_CASE("regions: validation") {
  const Grid g = build_grid(1, 64, 4.0, Boundary::dirichlet);
  CHECK_NOTHROW(validate(g, spec1d()));
  VanishingSpec s = spec1d();
  s.theta.hi[0] = 0.5;  // closures touch
  CHECK_THROWS_AS(validate(g, s), InvalidArgument);
  s = spec1d();
  s.theta.hi[0] = s.theta.lo[0];
  CHECK_THROWS_AS(validate(g, s), InvalidArgument);
  s = spec1d();
  s.support.hi[0] = 5.0;
  CHECK_THROWS_AS(validate(g, s), InvalidArgument);
}

TEST_CASE("bump: support and peak") {
  const Grid g = build_grid(1, 129, 4.0, Boundary::dirichlet);
  const auto f = build_bump(g, spec1d());
  for (std::size_t i = 0; i < g.dof_count(); ++i) {
    const double x = g.dof_position(i)[0];
    if (x <= 0.5 || x >= 2.5) CHECK(f(static_cast<Eigen::Index>(i)) == 0.0);
    if (std::abs(x - 1.5) < 1e-12) CHECK(f(static_cast<Eigen::Index>(i)) == doctest::Approx(1.0));
  }
  CHECK(f.minCoeff() >= 0.0);
}

TEST_CASE("region dofs: shrink removes boundary layers") {
  const Grid g = build_grid(1, 64, 4.0, Boundary::dirichlet);
  const Region r{{-3.0, 0.0}, {-1.0, 0.0}};
  const auto all = region_dofs(g, r);
  const auto inner = region_dofs(g, r, g.spacing());
  CHECK(all.size() > inner.size());
  for (auto d : inner) {
    const double x = g.dof_position(d)[0];
    CHECK(x > -3.0 + g.spacing());
    CHECK(x < -1.0 - g.spacing());
  }
}

TEST_CASE("probe: fractional power leaks into Theta, FFT oracle") {
  const int n = 128;
  const Grid g = build_grid(1, n, 4.0, Boundary::periodic);
  const auto dec = decompose(g);
  const auto spec = spec1d();
  const Eigen::VectorXd f = build_bump(g, spec);
  const auto theta = region_dofs(g, spec.theta);
  for (double a : {0.25, 0.5, 0.75}) {
    const auto r = nonlocality_probe(dec, a, spec);
    Eigen::VectorXcd ref = oracle::apply_symbol_power(f.cast<std::complex<double>>(), 1, n, g.spacing(), a);
    double in = 0.0;
    for (auto d : theta) in += std::norm(ref(static_cast<Eigen::Index>(d)));
    const double expect = std::sqrt(in) / ref.norm();
    CHECK(r.ratio > 1e-6);
    CHECK(r.ratio == doctest::Approx(expect).epsilon(1e-8));
    CHECK(r.theta_dofs == theta.size());
  }
}

TEST_CASE("probe: variable coefficients, Dirichlet") {
  const Grid g = build_grid(1, 128, 4.0, Boundary::dirichlet);
  const auto dec = decompose(g, CoefficientKind::radial_bump);
  for (double a : {0.25, 0.5, 0.75}) CHECK(nonlocality_probe(dec, a, spec1d()).ratio > 1e-6);
  CHECK_THROWS_AS(nonlocality_probe(dec, 1.5, spec1d()), InvalidArgument);
}

TEST_CASE("probe: zero bump gives ratio 0") {
  // the support sits between two grid nodes, so the bump vanishes on every DOF
  const Grid g = build_grid(1, 9, 4.0, Boundary::dirichlet);
  VanishingSpec s;
  s.theta = {{-3.0, 0.0}, {-1.0, 0.0}};
  s.support = {{0.1, 0.0}, {0.9, 0.0}};
  const auto r = nonlocality_probe(decompose(g), 0.5, s);
  CHECK(r.mass_total == 0.0);
  CHECK(r.ratio == 0.0);
}

TEST_CASE("locality: integer powers vanish on Theta") {
  const Grid g = build_grid(1, 128, 4.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = 0.5;
  const auto op = assemble(g, make_coefficients(g, CoefficientKind::radial_bump, p));
  for (int m : {1, 2}) {
    const auto r = locality_contrast(op, m, spec1d());
    CHECK(r.ratio == 0.0);
    CHECK(r.mass_total > 0.0);
  }
  CHECK_THROWS_AS(locality_contrast(op, 3, spec1d()), InvalidArgument);
  VanishingSpec narrow = spec1d();
  narrow.theta = {{-1.0 - 1.5 * g.spacing(), 0.0}, {-1.0, 0.0}};
  CHECK_THROWS_AS(locality_contrast(op, 2, narrow), InvalidArgument);
}

TEST_CASE("sweep: dichotomy") {
  const Grid g = build_grid(1, 128, 4.0, Boundary::dirichlet);
  const auto dec = decompose(g, CoefficientKind::radial_bump);
  const auto rows = dichotomy_sweep(dec, spec1d(), {0.25, 0.5, 0.75, 1.0});
  REQUIRE(rows.size() == 4);
  for (int i = 0; i < 3; ++i) CHECK(rows[static_cast<std::size_t>(i)].ratio > 1e-6);
  CHECK(rows[3].ratio == 0.0);
  CHECK(dichotomy_sweep(dec, spec1d(), {}).empty());
  const auto dup = dichotomy_sweep(dec, spec1d(), {0.5, 0.5});
  CHECK(dup[0].ratio == dup[1].ratio);
  CHECK(dup[0].mass_theta == dup[1].mass_theta);
  CHECK_THROWS_AS(dichotomy_sweep(dec, spec1d(), {0.0}), InvalidArgument);
}

TEST_CASE("sweep: 2D box") {
  const Grid g = build_grid(2, 24, 3.0, Boundary::dirichlet);
  const auto dec = decompose(g, CoefficientKind::radial_bump);
  VanishingSpec s;
  s.theta = {{-2.5, -2.5}, {-0.5, -0.5}};
  s.support = {{0.5, 0.5}, {2.5, 2.5}};
  const auto rows = dichotomy_sweep(dec, s, {0.5, 1.0});
  CHECK(rows[0].ratio > 1e-6);
  CHECK(rows[1].ratio == 0.0);
}

TEST_CASE("property: ratio is invariant under scaling the operator") {
  const Grid g = build_grid(1, 96, 4.0, Boundary::dirichlet);
  const auto dec = decompose(g, CoefficientKind::radial_bump);
  for (double k : {0.5, 3.0, 40.0}) {
    const SpectralDecomposition scaled(Eigen::VectorXd(k * dec.eigenvalues()), dec.eigenvectors(), dec.source_ptr());
    for (double a : {0.3, 0.6}) {
      const auto r0 = nonlocality_probe(dec, a, spec1d());
      const auto r1 = nonlocality_probe(scaled, a, spec1d());
      CHECK(r1.ratio == doctest::Approx(r0.ratio).epsilon(1e-10));
      CHECK(r1.mass_total == doctest::Approx(std::pow(k, a) * r0.mass_total).epsilon(1e-10));
    }
  }
}

TEST_CASE("sweep csv") {
  const Grid g = build_grid(1, 64, 4.0, Boundary::dirichlet);
  const auto rows = dichotomy_sweep(decompose(g), spec1d(), {0.5, 1.0});
  const auto path = std::filesystem::temp_directory_path() / "fracspec_sweep_test.csv";
  write_sweep_csv(path.string(), rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "alpha,mass_theta,mass_total,ratio");
  std::filesystem::remove(path);
}
