#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Core>

#include "fracspec/discrete_operator.hpp"
#include "fracspec/scalar_map.hpp"

namespace fracspec {

/// Eigenpairs (Lambda, V) of a discrete operator, Lambda nondecreasing, V orthonormal.
///
/// Eigenvalues in [-1e-10, 1e-10] * Lambda_max produced by roundoff are stored as 0.
class SpectralDecomposition {
 public:
  SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
                        std::shared_ptr<const DiscreteOperator> source);

  /// Decomposition given directly by its eigenpairs, with no grid behind it.
  /// `cell_volume` weights the discrete L2 norm (1 for abstract operators).
  static SpectralDecomposition from_eigenpairs(Eigen::VectorXd eigenvalues,
                                               Eigen::MatrixXd eigenvectors,
                                               double cell_volume = 1.0);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }
  double lambda_min() const { return values_(0); }
  double lambda_max() const { return values_(values_.size() - 1); }

  /// May be null for decompositions built from raw eigenpairs.
  const DiscreteOperator* source() const noexcept { return source_.get(); }
  const std::shared_ptr<const DiscreteOperator>& source_ptr() const noexcept { return source_; }
  double cell_volume() const noexcept { return cell_volume_; }

  /// Coefficients V^T f and synthesis V c.
  Eigen::VectorXd to_modes(const Eigen::VectorXd& f) const { return vectors_.transpose() * f; }
  Eigen::VectorXcd to_modes(const Eigen::VectorXcd& f) const;
  Eigen::VectorXd from_modes(const Eigen::VectorXd& c) const { return vectors_ * c; }
  Eigen::VectorXcd from_modes(const Eigen::VectorXcd& c) const;

  /// Discrete L2 norm with the cell-volume weight.
  double norm(const Eigen::VectorXd& f) const;
  double norm(const Eigen::VectorXcd& f) const;

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  std::shared_ptr<const DiscreteOperator> source_;
  double cell_volume_;
};

struct DecompositionCheck {
  double orthonormality_error;   ///< ||V^T V - I||_max
  double reconstruction_error;   ///< ||V diag(L) V^T - K||_max / max|L|
  double min_eigenvalue_ratio;   ///< Lambda[0] / Lambda[last] before clamping
  bool ok() const noexcept {
    return orthonormality_error <= 1e-10 && reconstruction_error <= 1e-8 &&
           min_eigenvalue_ratio >= -1e-10;
  }
};

struct EigenOptions {
  std::size_t max_dofs = 4096;
  /// Run the O(n^3) orthonormality and reconstruction checks after solving.
  bool verify = true;
};

/// Dense symmetric eigensolve (LAPACK dsyevd). Throws InvalidArgument when
/// the DOF count exceeds the cap, NumericalError when a check fails.
SpectralDecomposition eigendecompose(const DiscreteOperator& op, const EigenOptions& options = {});

/// Recomputes the invariants of a decomposition against its source operator.
DecompositionCheck verify(const SpectralDecomposition& dec);

/// Values of `map` on the spectrum; throws SingularityError naming the first
/// eigenvalue where the map is not finite.
Eigen::VectorXcd spectral_multipliers(const SpectralDecomposition& dec, const ScalarMap& map);

/// V diag(map(Lambda)) V^T f.
Eigen::VectorXcd apply_function(const SpectralDecomposition& dec, const ScalarMap& map,
                                const Eigen::VectorXcd& f);
Eigen::VectorXcd apply_function(const SpectralDecomposition& dec, const ScalarMap& map,
                                const Eigen::VectorXd& f);
/// Real-valued maps only; throws InvalidArgument for complex maps.
Eigen::VectorXd apply_real(const SpectralDecomposition& dec, const ScalarMap& map,
                           const Eigen::VectorXd& f);

/// L^alpha f for alpha >= 0.
Eigen::VectorXd fractional_power(const SpectralDecomposition& dec, double alpha,
                                 const Eigen::VectorXd& f);
Eigen::VectorXcd fractional_power(const SpectralDecomposition& dec, double alpha,
                                  const Eigen::VectorXcd& f);

/// e^{i t L^alpha} f.
Eigen::VectorXcd unitary_propagate(const SpectralDecomposition& dec, double alpha, double t,
                                   const Eigen::VectorXcd& f);

/// e^{t(-eps L^2 + i L^alpha)} f for eps >= 0, t >= 0.
Eigen::VectorXcd viscous_propagate(const SpectralDecomposition& dec, double alpha, double eps,
                                   double t, const Eigen::VectorXcd& f);

struct SmoothingBound {
  double measured;        ///< max_k lambda_k exp(-eps t lambda_k^2) = ||L e^{-eps t L^2 + i t L^alpha}||
  double bound;           ///< (2 e eps t)^{-1/2}
  double lambda_star;     ///< (2 eps t)^{-1/2}, maximiser of lambda e^{-eps t lambda^2}
  bool lambda_star_in_spectrum;
};

/// Operator norm of L composed with the viscous propagator. Requires eps t > 0.
SmoothingBound smoothing_bound(const SpectralDecomposition& dec, double eps, double t);

}  // namespace fracspec
