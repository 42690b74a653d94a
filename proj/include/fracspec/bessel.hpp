#pragma once

#include <Eigen/Core>

#include "fracspec/grid.hpp"
#include "fracspec/spectral.hpp"

namespace fracspec {

/// Bessel potential J^s = (1 - Delta_h)^{s/2} of the discrete Laplacian on a
/// grid (same boundary condition as the grid), and the Sobolev norm
/// ||f||_{s,2} = ||J^s f||_2 built from it.
class BesselPotential {
 public:
  explicit BesselPotential(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  const SpectralDecomposition& laplacian() const noexcept { return laplacian_; }

  Eigen::VectorXd apply(double s, const Eigen::VectorXd& f) const;
  Eigen::VectorXcd apply(double s, const Eigen::VectorXcd& f) const;

  double sobolev_norm(double s, const Eigen::VectorXd& f) const;
  double sobolev_norm(double s, const Eigen::VectorXcd& f) const;

 private:
  Grid grid_;
  SpectralDecomposition laplacian_;
};

/// One-shot J^s f. Builds the Laplacian decomposition on every call; keep a
/// BesselPotential around for repeated use.
Eigen::VectorXd bessel_apply(const Grid& grid, double s, const Eigen::VectorXd& f);

}  // namespace fracspec
