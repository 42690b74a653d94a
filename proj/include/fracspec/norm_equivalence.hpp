#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracspec/bessel.hpp"
#include "fracspec/coefficients.hpp"
#include "fracspec/spectral.hpp"

namespace fracspec {

/// Extremes of r(f) = (||f|| + ||L^alpha f||) / ||(1 - Delta_h)^alpha f|| over a test set.
struct RatioBracket {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

RatioBracket norm_ratios(const SpectralDecomposition& dec, const BesselPotential& bessel,
                         double alpha, const std::vector<Eigen::VectorXd>& test_set);

/// Convenience overload that decomposes `op` and the Laplacian of its grid.
RatioBracket norm_ratios(const DiscreteOperator& op, double alpha,
                         const std::vector<Eigen::VectorXd>& test_set);

/// Test functions: seeded Gaussian bumps defined in physical coordinates (so
/// they resample consistently on refined grids) plus selected eigenvectors.
struct TestSetSpec {
  int bumps = 16;
  std::vector<int> eigen_indices{0, 1, 2, 3, 4, 5, 6, 7};
  std::uint64_t seed = 1;
};

std::vector<Eigen::VectorXd> make_test_set(const Grid& grid, const SpectralDecomposition& dec,
                                           const TestSetSpec& spec);

struct NormEquivalenceReport {
  double alpha = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  /// max relative change of the bracket ends between N and 2N points per
  /// axis; NaN when the field cannot be resampled (tabulated).
  double refinement_drift = 0.0;
  std::size_t n_samples = 0;
};

/// Runs the ratio study on `field`'s grid and on the grid with twice the
/// points per axis, for each alpha.
std::vector<NormEquivalenceReport> norm_equivalence(const CoefficientField& field,
                                                    const std::vector<double>& alphas,
                                                    const TestSetSpec& spec = {},
                                                    const EigenOptions& eig = {});

/// {alpha, lambda_min, lambda_max, ratio_min, ratio_max, refinement_drift, n_samples}
std::string to_json(const NormEquivalenceReport& report);

}  // namespace fracspec
