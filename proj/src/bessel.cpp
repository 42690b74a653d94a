#include "fracspec/bessel.hpp"

#include <cmath>

#include "fracspec/coefficients.hpp"
#include "fracspec/discrete_operator.hpp"
#include "fracspec/error.hpp"

namespace fracspec {

namespace {

SpectralDecomposition laplacian_decomposition(const Grid& grid) {
  const auto field = make_coefficients(grid, CoefficientKind::identity);
  return eigendecompose(assemble(grid, field), EigenOptions{.verify = false});
}

}  // namespace

BesselPotential::BesselPotential(const Grid& grid)
    : grid_(grid), laplacian_(laplacian_decomposition(grid)) {}

Eigen::VectorXd BesselPotential::apply(double s, const Eigen::VectorXd& f) const {
  if (s == 0.0) return f;
  // Even positive orders are the polynomial (1 + K)^{s/2}: apply the stencil.
  if (s > 0.0 && s <= 8.0 && std::floor(0.5 * s) == 0.5 * s) {
    Eigen::VectorXd g = f;
    for (int k = 0; k < static_cast<int>(0.5 * s); ++k) g += laplacian_.source()->apply(g);
    return g;
  }
  return apply_real(laplacian_, ScalarMap::shifted_power(0.5 * s), f);
}

Eigen::VectorXcd BesselPotential::apply(double s, const Eigen::VectorXcd& f) const {
  if (s == 0.0) return f;
  if (s > 0.0 && s <= 8.0 && std::floor(0.5 * s) == 0.5 * s) {
    Eigen::VectorXcd g = f;
    for (int k = 0; k < static_cast<int>(0.5 * s); ++k) g += laplacian_.source()->apply(g);
    return g;
  }
  return apply_function(laplacian_, ScalarMap::shifted_power(0.5 * s), f);
}

double BesselPotential::sobolev_norm(double s, const Eigen::VectorXd& f) const {
  return grid_.norm(apply(s, f));
}

double BesselPotential::sobolev_norm(double s, const Eigen::VectorXcd& f) const {
  return grid_.norm(apply(s, f));
}

Eigen::VectorXd bessel_apply(const Grid& grid, double s, const Eigen::VectorXd& f) {
  return BesselPotential(grid).apply(s, f);
}

}  // namespace fracspec
