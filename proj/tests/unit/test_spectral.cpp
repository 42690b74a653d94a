#include <doctest.h>

#include <cmath>
#include <random>

#include "fft_oracle.hpp"
#include "fracspec/bessel.hpp"
#include "fracspec/coefficients.hpp"
#include "fracspec/discrete_operator.hpp"
#include "fracspec/error.hpp"
#include "fracspec/norm_equivalence.hpp"
#include "fracspec/spectral.hpp"

using namespace fracspec;
using cplx = std::complex<double>;

namespace {

DiscreteOperator bump_operator(const Grid& g, double c_offset = 0.0) {
  CoefficientParams p;
  p.scale = 0.5;
  p.width = 1.0;
  if (g.dim() == 2) p.shape = {1.0, 0.25, 0.25, 0.5};
  p.c_amplitude = 0.3;
  p.c_offset = c_offset;
  return assemble(g, make_coefficients(g, CoefficientKind::radial_bump, p));
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

Eigen::VectorXcd random_complex(Eigen::Index n, std::mt19937_64& rng) {
  return random_vector(n, rng).cast<cplx>() + cplx(0, 1) * random_vector(n, rng).cast<cplx>();
}

double rel(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a - b).norm() / b.norm(); }
double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("eigendecompose: 1D dirichlet laplacian closed form") {
  const Grid g = build_grid(1, 130, 8.0, Boundary::dirichlet);
  const auto dec = eigendecompose(assemble(g, make_coefficients(g, CoefficientKind::identity)));
  const double h = g.spacing();
  const auto n = static_cast<int>(dec.size());
  REQUIRE(n == 128);
  for (int k = 1; k <= n; ++k) {
    const double s = std::sin(k * M_PI / (2.0 * (n + 1)));
    const double exact = 4.0 / (h * h) * s * s;
    CHECK(std::abs(dec.eigenvalues()(k - 1) - exact) <= 1e-8 * exact);
  }
}

TEST_CASE("eigendecompose: invariants on a bump field") {
  const Grid g = build_grid(2, 14, 3.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  const auto chk = verify(dec);
  CHECK(chk.orthonormality_error <= 1e-10);
  CHECK(chk.reconstruction_error <= 1e-8);
  CHECK(chk.ok());
  for (Eigen::Index k = 1; k < dec.eigenvalues().size(); ++k)
    CHECK(dec.eigenvalues()(k) >= dec.eigenvalues()(k - 1));
  CHECK(dec.lambda_min() >= -1e-10 * dec.lambda_max());
}

TEST_CASE("eigendecompose: constant shift of c shifts every eigenvalue") {
  const Grid g = build_grid(1, 40, 3.0, Boundary::dirichlet);
  const auto d0 = eigendecompose(bump_operator(g, 0.0));
  const auto d1 = eigendecompose(bump_operator(g, 1.0));
  CHECK(((d1.eigenvalues() - d0.eigenvalues()).array() - 1.0).abs().maxCoeff() < 1e-10);
  // same operator action, independent of eigenvector signs
  std::mt19937_64 rng(1);
  const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(d0.size()), rng);
  const Eigen::VectorXd lhs = apply_real(d1, ScalarMap::heat(0.2), f);
  const Eigen::VectorXd rhs = std::exp(-0.2) * apply_real(d0, ScalarMap::heat(0.2), f);
  CHECK(rel(lhs, rhs) < 1e-10);
}

TEST_CASE("eigendecompose: cap") {
  const Grid g = build_grid(1, 40, 3.0, Boundary::dirichlet);
  CHECK_THROWS_AS(eigendecompose(bump_operator(g), {10, true}), InvalidArgument);
}

TEST_CASE("apply_function: identity and power(1)") {
  const Grid g = build_grid(1, 50, 4.0, Boundary::dirichlet);
  const auto op = bump_operator(g);
  const auto dec = eigendecompose(op);
  std::mt19937_64 rng(2);
  const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(dec.size()), rng);
  CHECK(rel(apply_real(dec, ScalarMap::identity(), f), op.apply(f)) < 1e-12);
  CHECK(rel(fractional_power(dec, 1.0, f), op.apply(f)) < 1e-12);
  CHECK(rel(apply_real(dec, ScalarMap::power(0.0), f), f) < 1e-12);
  CHECK(rel(apply_real(dec, ScalarMap::heat(0.0), f), f) < 1e-12);
}

TEST_CASE("apply_function: periodic power(1/2) matches the FFT symbol oracle") {
  for (int dim : {1, 2}) {
    const int n = dim == 1 ? 64 : 16;
    const Grid g = build_grid(dim, n, 4.0, Boundary::periodic);
    const auto dec = eigendecompose(assemble(g, make_coefficients(g, CoefficientKind::identity)));
    std::mt19937_64 rng(3);
    const Eigen::VectorXcd f = random_complex(static_cast<Eigen::Index>(dec.size()), rng);
    const Eigen::VectorXcd ours = fractional_power(dec, 0.5, f);
    const Eigen::VectorXcd theirs = oracle::apply_symbol_power(f, dim, n, g.spacing(), 0.5);
    CHECK(rel(ours, theirs) < 1e-10);
  }
}

TEST_CASE("fractional_power: integer and composed powers") {
  const Grid g = build_grid(1, 130, 8.0, Boundary::dirichlet);
  const auto op = bump_operator(g);
  const auto dec = eigendecompose(op);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(dec.size()), rng);
    CHECK(rel(fractional_power(dec, 2.0, f), op.apply(op.apply(f))) < 1e-9);
    CHECK(rel(fractional_power(dec, 0.5, fractional_power(dec, 0.5, f)), op.apply(f)) < 1e-9);
  }
  CHECK_THROWS_AS(fractional_power(dec, -0.5, Eigen::VectorXd(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dec.size())))),
                  InvalidArgument);
}

TEST_CASE("apply_function: negative power on a zero eigenvalue is a singularity") {
  const Grid g = build_grid(1, 16, 2.0, Boundary::periodic);
  const auto dec = eigendecompose(assemble(g, make_coefficients(g, CoefficientKind::identity)));
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(16);
  try {
    apply_function(dec, ScalarMap::power(-0.5), f);
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.index() == 0);
    CHECK(e.eigenvalue() == 0.0);
  }
  // the shifted power is defined everywhere
  CHECK(apply_function(dec, ScalarMap::shifted_power(-0.5), f).allFinite());
}

TEST_CASE("unitary_propagate: norm and group law") {
  const Grid g = build_grid(1, 80, 4.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  std::mt19937_64 rng(5);
  const Eigen::VectorXcd f = random_complex(static_cast<Eigen::Index>(dec.size()), rng);
  CHECK(rel(unitary_propagate(dec, 0.5, 0.0, f), f) < 1e-14);
  for (double a : {0.25, 0.5, 0.75}) {
    for (double t : {0.1, 1.0, 10.0})
      CHECK(std::abs(dec.norm(unitary_propagate(dec, a, t, f)) / dec.norm(f) - 1.0) < 1e-10);
    const Eigen::VectorXcd lhs = unitary_propagate(dec, a, 0.3, unitary_propagate(dec, a, 0.7, f));
    CHECK(rel(lhs, unitary_propagate(dec, a, 1.0, f)) < 1e-10);
  }
}

TEST_CASE("viscous_propagate: scalar operator") {
  const auto dec = SpectralDecomposition::from_eigenpairs(Eigen::VectorXd::Constant(1, 2.0),
                                                          Eigen::MatrixXd::Identity(1, 1));
  const Eigen::VectorXcd f = Eigen::VectorXcd::Constant(1, cplx(0.3, -1.2));
  const cplx expected = f(0) * std::exp(cplx(-0.4, std::sqrt(2.0)));
  CHECK(std::abs(viscous_propagate(dec, 0.5, 0.1, 1.0, f)(0) - expected) < 1e-14);
}

TEST_CASE("viscous_propagate: eps = 0 is unitary and eps > 0 contracts") {
  const Grid g = build_grid(1, 60, 4.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  std::mt19937_64 rng(6);
  const Eigen::VectorXcd f = random_complex(static_cast<Eigen::Index>(dec.size()), rng);
  CHECK(rel(viscous_propagate(dec, 0.5, 0.0, 0.7, f), unitary_propagate(dec, 0.5, 0.7, f)) < 1e-14);
  CHECK(dec.norm(viscous_propagate(dec, 0.5, 0.01, 0.7, f)) <= dec.norm(f));
}

TEST_CASE("smoothing_bound: maximiser of lambda exp(-eps t lambda^2)") {
  const Grid g = build_grid(1, 130, 8.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  for (double eps : {0.01, 0.1}) {
    for (double t : {0.1, 1.0}) {
      const auto b = smoothing_bound(dec, eps, t);
      CHECK(b.bound == doctest::Approx(1.0 / std::sqrt(2.0 * M_E * eps * t)));
      CHECK(b.lambda_star == doctest::Approx(1.0 / std::sqrt(2.0 * eps * t)));
      CHECK(b.measured <= b.bound * (1.0 + 1e-10));
      double brute = 0.0;
      for (Eigen::Index k = 0; k < dec.eigenvalues().size(); ++k) {
        const double l = dec.eigenvalues()(k);
        brute = std::max(brute, l * std::exp(-eps * t * l * l));
      }
      CHECK(b.measured == doctest::Approx(brute).epsilon(1e-14));
      if (b.lambda_star_in_spectrum) CHECK(b.measured / b.bound > 0.98);
    }
  }
}

TEST_CASE("bessel: order 0, 2 and inverse pair") {
  for (Boundary bc : {Boundary::dirichlet, Boundary::periodic}) {
    const Grid g = build_grid(2, 10, 2.0, bc);
    const BesselPotential J(g);
    const auto lap = assemble(g, make_coefficients(g, CoefficientKind::identity));
    std::mt19937_64 rng(8);
    const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(g.dof_count()), rng);
    CHECK(rel(J.apply(0.0, f), f) < 1e-12);
    CHECK(rel(J.apply(2.0, f), Eigen::VectorXd(f + lap.apply(f))) < 1e-12);
    CHECK(rel(J.apply(2.0, J.apply(-2.0, f)), f) < 1e-10);
    CHECK(rel(bessel_apply(g, 2.0, f), J.apply(2.0, f)) < 1e-12);
  }
}

TEST_CASE("norm ratios: alpha = 0 gives 2") {
  const Grid g = build_grid(1, 40, 4.0, Boundary::dirichlet);
  const auto op = bump_operator(g);
  const auto dec = eigendecompose(op);
  const BesselPotential J(g);
  const auto tests = make_test_set(g, dec, {});
  const auto b = norm_ratios(dec, J, 0.0, tests);
  CHECK(b.min == doctest::Approx(2.0));
  CHECK(b.max == doctest::Approx(2.0));
  CHECK(b.count == tests.size());
}

TEST_CASE("norm ratios: constant coefficients, periodic, bracket [1, 2^{1-a}]") {
  const Grid g = build_grid(1, 64, 8.0, Boundary::periodic);
  const auto dec = eigendecompose(assemble(g, make_coefficients(g, CoefficientKind::identity)));
  const BesselPotential J(g);
  std::vector<Eigen::VectorXd> modes;
  for (Eigen::Index k = 0; k < dec.eigenvectors().cols(); ++k) modes.push_back(dec.eigenvectors().col(k));
  auto tests = make_test_set(g, dec, {});
  tests.insert(tests.end(), modes.begin(), modes.end());
  for (double a : {0.25, 0.5, 0.75, 1.0}) {
    // general f: 1 + s^a >= (1 + s)^a gives the lower end; the upper end
    // picks up sqrt(2) from ||f|| + ||L^a f|| <= sqrt(2) ||(f, L^a f)||
    const auto b = norm_ratios(dec, J, a, tests);
    CHECK(b.min >= 1.0 - 1e-9);
    CHECK(b.max <= std::sqrt(2.0 * std::max(1.0, std::pow(2.0, 1.0 - 2.0 * a))) + 1e-9);
    const auto modes_only = norm_ratios(dec, J, a, modes);
    CHECK(modes_only.min >= 1.0 - 1e-9);
    CHECK(modes_only.max <= std::pow(2.0, 1.0 - a) + 1e-9);
    // oracle: the scalar function (1 + s^a) / (1 + s)^a on the symbol values
    const Eigen::VectorXd m = oracle::symbol_values(1, 64, g.spacing());
    double lo = HUGE_VAL, hi = 0.0;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double r = (1.0 + std::pow(m(k), a)) / std::pow(1.0 + m(k), a);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const auto bm = norm_ratios(dec, J, a, modes);
    CHECK(bm.min == doctest::Approx(lo).epsilon(1e-10));
    CHECK(bm.max == doctest::Approx(hi).epsilon(1e-10));
  }
}

TEST_CASE("norm ratios: zero test function rejected") {
  const Grid g = build_grid(1, 20, 4.0, Boundary::dirichlet);
  CHECK_THROWS_AS(norm_ratios(bump_operator(g), 0.5, {Eigen::VectorXd::Zero(18)}), InvalidArgument);
}

TEST_CASE("norm_equivalence: refinement drift for a bump field") {
  const Grid g = build_grid(1, 64, 8.0, Boundary::dirichlet);
  CoefficientParams p;
  p.scale = 0.5;
  p.width = 1.0;
  const auto reports = norm_equivalence(make_coefficients(g, CoefficientKind::radial_bump, p), {0.5});
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].refinement_drift <= 0.1);
  CHECK(reports[0].ratio_min > 0.0);
  CHECK(reports[0].ratio_min <= reports[0].ratio_max);
  const auto j = to_json(reports[0]);
  for (const char* key : {"alpha", "lambda_min", "lambda_max", "ratio_min", "ratio_max", "refinement_drift", "n_samples"})
    CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("property: functional calculus homomorphism") {
  const Grid g = build_grid(1, 60, 4.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  std::mt19937_64 rng(10);
  const std::vector<ScalarMap> catalog = {ScalarMap::power(0.3), ScalarMap::heat(0.05),
                                          ScalarMap::unitary_frac(0.7, 0.5),
                                          ScalarMap::viscous(0.01, 0.2, 0.75), ScalarMap::shifted_power(-0.4)};
  for (const auto& f_map : catalog) {
    for (const auto& g_map : catalog) {
      const Eigen::VectorXcd f = random_complex(static_cast<Eigen::Index>(dec.size()), rng);
      const Eigen::VectorXcd lhs = apply_function(dec, g_map, apply_function(dec, f_map, f));
      const Eigen::VectorXcd rhs = apply_function(dec, g_map * f_map, f);
      CHECK(rel(lhs, rhs) < 1e-9);
    }
  }
}

TEST_CASE("property: heat commutes with fractional powers") {
  const Grid g = build_grid(2, 12, 2.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(dec.size()), rng);
    const double a = 0.1 + 0.08 * trial;
    const Eigen::VectorXd ab = apply_real(dec, ScalarMap::heat(0.01), fractional_power(dec, a, f));
    const Eigen::VectorXd ba = fractional_power(dec, a, apply_real(dec, ScalarMap::heat(0.01), f));
    CHECK((ab - ba).norm() <= 1e-9 * f.norm() * std::max(1.0, std::pow(dec.lambda_max(), a)));
  }
}

TEST_CASE("property: fractional powers are self-adjoint") {
  const Grid g = build_grid(1, 90, 4.0, Boundary::dirichlet);
  const auto dec = eigendecompose(bump_operator(g));
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(dec.size()), rng);
    const Eigen::VectorXd h = random_vector(static_cast<Eigen::Index>(dec.size()), rng);
    const double a = 0.05 * (trial + 1);
    const double lhs = fractional_power(dec, a, f).dot(h);
    const double rhs = f.dot(fractional_power(dec, a, h));
    const double scale = fractional_power(dec, a, f).norm() * h.norm();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
  }
}
