#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracspec/discrete_operator.hpp"
#include "fracspec/spectral.hpp"

namespace fracspec {

/// Open interval (1D) or axis-aligned open box (2D); unused axes are ignored.
struct Region {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
};

/// Theta is where f and L^alpha f are probed; the bump f lives on `support`.
struct VanishingSpec {
  Region theta;
  Region support;
};

/// Rejects empty regions, regions outside [-X, X]^dim and a Theta that
/// touches or overlaps the support (closures must be disjoint).
void validate(const Grid& grid, const VanishingSpec& spec);

/// prod_d (1 - r_d^2)^4 with r_d the scaled distance to the support centre; 0 outside.
Eigen::VectorXd build_bump(const Grid& grid, const VanishingSpec& spec);

/// DOFs strictly inside the region after moving every face inwards by `shrink`.
std::vector<std::size_t> region_dofs(const Grid& grid, const Region& region, double shrink = 0.0);

struct ProbeResult {
  double alpha;
  double mass_theta;   ///< ||g||_{l2(Theta)}
  double mass_total;   ///< ||g||_2
  double ratio;        ///< mass_theta / mass_total, 0 when g = 0
  std::size_t theta_dofs;
};

/// g = L^alpha f for the bump f of `spec`, measured on Theta. alpha in (0,1).
ProbeResult nonlocality_probe(const SpectralDecomposition& dec, double alpha,
                              const VanishingSpec& spec);

/// L^m f by m sparse applications, measured on Theta shrunk by m grid spacings.
/// m in {1, 2}; throws InvalidArgument when the shrunken Theta holds no DOF.
ProbeResult locality_contrast(const DiscreteOperator& op, int m, const VanishingSpec& spec);

/// One row per alpha in (0,1], every row measured on Theta shrunk by one grid
/// spacing. alpha = 1 applies the sparse operator, alpha < 1 the spectral power.
std::vector<ProbeResult> dichotomy_sweep(const SpectralDecomposition& dec,
                                         const VanishingSpec& spec,
                                         const std::vector<double>& alphas);

/// Columns: alpha, mass_theta, mass_total, ratio.
void write_sweep_csv(const std::string& path, const std::vector<ProbeResult>& rows);

}  // namespace fracspec
