#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracspec/grid.hpp"
#include "fracspec/spectral.hpp"

namespace fracspec {

/// c*_alpha = 4^alpha Gamma(alpha) / (2 alpha Gamma(-alpha)). Negative on (0,1).
double conormal_constant(double alpha);

/// Log-spaced trapezoid rule for the t-integral of the extension kernel.
/// The truncation interval is [t_min_factor / lambda_max, t_max_factor / lambda_low], where
/// lambda_low is the smallest positive eigenvalue (floored at 1e-12).
struct ExtensionQuadrature {
  int nodes = 400;
  double t_min_factor = 1e-8;
  double t_max_factor = 1e4;
};

/// Resolved rule actually used by an extension.
struct QuadratureDescriptor {
  int nodes = 0;
  double t_min = 0.0;
  double t_max = 0.0;
};

/// M_alpha(lambda, y) and the weighted derivative y^{1-2alpha} d_y M_alpha(lambda, y).
struct ModeKernel {
  double multiplier;
  double flux;
};

/// Quadrature of
///   M(lambda, y) = y^{2a} / (4^a Gamma(a)) int e^{-t lambda} e^{-y^2/4t} t^{-1-a} dt
///   y^{1-2a} d_y M = -2 lambda / (4^a Gamma(a)) int e^{-t lambda} e^{-y^2/4t} t^{-a} dt.
/// The flux form follows from differentiating under the integral and
/// integrating by parts in t; it avoids the cancellation of differencing M.
/// lambda = 0 uses the exact normalisation M = 1, flux = 0.
class ExtensionKernel {
 public:
  ExtensionKernel(double alpha, const QuadratureDescriptor& rule);

  double alpha() const noexcept { return alpha_; }
  const QuadratureDescriptor& rule() const noexcept { return rule_; }

  ModeKernel evaluate(double lambda, double y) const { return sum(lambda, y, 1); }
  /// Same rule on every other node: the reference for the convergence check.
  ModeKernel evaluate_coarse(double lambda, double y) const { return sum(lambda, y, 2); }

 private:
  ModeKernel sum(double lambda, double y, int stride) const;

  double alpha_;
  QuadratureDescriptor rule_;
  double log_prefactor_;   ///< -log(4^a Gamma(a))
  std::vector<double> log_t_;
  double step_;
};

/// y0 * ratio^k for k = 0..count-1.
std::vector<double> geometric_ladder(double y0, double ratio, int count);

/// Ladder from h/32 up to 4X with ratio 2^{1/4}.
std::vector<double> default_ladder(const Grid& grid);

struct QuadratureIssue {
  std::size_t mode;
  double lambda;
  double y;
  double relative_change;
};

/// U(x, y_k) sampled on a grid and a ladder of heights, plus the weighted
/// derivative y^{1-2alpha} d_y U on the same nodes.
struct ExtensionField {
  Grid grid;
  double alpha = 0.5;
  Eigen::VectorXd base;
  Eigen::VectorXd power;    ///< L^alpha u computed spectrally; empty for synthetic fields
  std::vector<double> y_nodes;
  Eigen::MatrixXd values;   ///< dof x y
  Eigen::MatrixXd flux;     ///< dof x y; empty for synthetic fields
  QuadratureDescriptor quadrature;
  /// Pairs where the full and half rules differ by more than 1e-6 relative.
  std::vector<QuadratureIssue> unconverged;
  /// Operator the field extends; null for synthetic fields.
  std::shared_ptr<const DiscreteOperator> source;

  double norm_at(std::size_t k) const;

  /// Columns: x-index (DOF), y, U. 2D grids add a second index column.
  void write_csv(const std::string& path) const;
  /// alpha, quadrature descriptor and ladder.
  std::string metadata_json() const;
};

/// Spectral evaluation of the extension of u. Throws InvalidArgument for
/// alpha outside (0,1), an empty or non-increasing ladder, or nonpositive heights.
ExtensionField extend(const SpectralDecomposition& dec, double alpha, const Eigen::VectorXd& u,
                      std::vector<double> y_nodes, const ExtensionQuadrature& quadrature = {});

/// Field with prescribed values and no operator behind it (doubling tests).
ExtensionField synthetic_extension(const Grid& grid, double alpha, std::vector<double> y_nodes,
                                   Eigen::MatrixXd values);

struct ExtensionChecks {
  double max_norm_ratio;             ///< max_k ||U(., y_k)|| / ||u||
  bool contraction;                  ///< norms nonincreasing in y and bounded by ||u|| (1 + 1e-8)
  std::array<double, 3> trace_errors;  ///< ||U(., y_k) - u|| on the three lowest nodes
  double trace_tolerance;            ///< 10 y0^{min(2alpha, 1)} ||u||
  bool trace_ok;                     ///< errors nonincreasing towards y0 and below tolerance
  bool ok() const noexcept { return contraction && trace_ok; }
};

/// Contraction and trace invariants of a computed field.
ExtensionChecks check_extension(const ExtensionField& ext);

struct RecoveryResult {
  Eigen::VectorXd value;          ///< c*_alpha * F0
  Eigen::VectorXd flux_limit;     ///< F0 = lim_{y->0} y^{1-2alpha} d_y U
  std::array<double, 3> heights;  ///< ladder nodes used by the extrapolation
  double discrepancy;             ///< relative gap between the 3-point and 2-point limits
  bool diverged;                  ///< discrepancy > 10 * tolerance
};

/// Richardson extrapolation of y^{1-2alpha} d_y U to y = 0 using the error
/// expansion F(y) = F0 + c1 y^{2-2alpha} + c2 y^2 + ..., with the smallest
/// ladder node and the first nodes at or beyond 2 and 4 times it.
/// Throws InvalidArgument when fewer than 3 usable nodes exist.
RecoveryResult conormal_recover(const ExtensionField& ext, double tolerance = 1e-3);

struct EnergyReport {
  double energy;       ///< int y^{1-2alpha} (|d_y U|^2 + |grad_x U|^2)
  double base_norm;    ///< ||u||_2
  double power_norm;   ///< ||L^alpha u||_2
  double ratio;        ///< energy / (||u||^2 + ||L^alpha u||^2), 0 for u = 0
};

/// Weighted energy by trapezoid in log y over the ladder, closed-form pieces
/// on [0, y0] and face differences in x. Needs an extension from extend().
EnergyReport energy_report(const ExtensionField& ext);

struct DoublingEntry {
  double radius;
  double ratio;
};

/// sqrt(mass(B+_{2R}) / mass(B+_R)) where mass is the y^{1-2alpha} weighted
/// squared L2 norm over the half ball centred at (center, 0). Cells count when
/// their centre lies inside the ball; the y-weight of each cell is integrated
/// exactly. Throws InvalidArgument when 2R leaves the sampled box and for a
/// zero mass on B+_R.
std::vector<DoublingEntry> doubling_ratio(const ExtensionField& ext,
                                          const std::vector<double>& radii,
                                          Point center = {0.0, 0.0});

/// xi(x, y) = prod_d phi((x_d - c_d) / r_x) * exp(-(y / r_y)^2), phi(s) = (1 - s^2)^4 on |s| < 1.
struct TestFunction {
  Point center{0.0, 0.0};
  double radius_x = 1.0;
  double radius_y = 1.0;
};

/// max over xi of |W(U, xi)| / (||U||_E ||xi||_E) where
///   W(U, xi) = int int y^{1-2alpha} (d_y U d_y xi + a grad U . grad xi + c U xi) + int F0 xi(x, 0)
/// with the x part evaluated as the discrete form <K U, xi>. Returns 0 for U = 0.
double weak_residual(const ExtensionField& ext, const std::vector<TestFunction>& tests);

}  // namespace fracspec
