#pragma once

#include <cstddef>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fracspec/coefficients.hpp"
#include "fracspec/grid.hpp"

namespace fracspec {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Stencil { flux_form };

/// Real symmetric matrix realizing Lv = -d_k(a_jk d_j v) + c v on the DOFs of a grid.
class DiscreteOperator {
 public:
  DiscreteOperator(Grid grid, CoefficientField field, SparseMatrix matrix);

  const Grid& grid() const noexcept { return grid_; }
  const CoefficientField& field() const noexcept { return field_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  Stencil stencil() const noexcept { return Stencil::flux_form; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return matrix_ * f; }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }

  /// min_i (K_ii - sum_{j != i} |K_ij|).
  double gershgorin_lower_bound() const noexcept { return gershgorin_; }
  double max_abs_entry() const noexcept { return max_abs_; }
  /// Gershgorin bounds >= -1e-12 * max|K|. Always true without mixed terms;
  /// anisotropic 2D stencils may be positive semidefinite without passing it.
  bool gershgorin_nonnegative() const noexcept { return gershgorin_ >= -1e-12 * max_abs_; }

 private:
  Grid grid_;
  CoefficientField field_;
  SparseMatrix matrix_;
  double gershgorin_ = 0.0;
  double max_abs_ = 0.0;
};

/// Conservative second-order flux-form assembly with arithmetic face averages
/// a_{i+1/2} = (a_i + a_{i+1}) / 2.
///
/// The matrix is the Hessian of the discrete energy
///   sum_faces a_f (D u)^2 + sum_cells 2 a12_cell g_x g_y + sum_nodes c u^2
/// divided by the cell volume, where g_x, g_y are the cell-centred gradients
/// averaged over the two parallel cell edges. Only the upper triangle is
/// accumulated and mirrored, so K^T == K holds bit for bit. Throws
/// CoefficientError for invalid fields and InvalidArgument for a grid mismatch.
DiscreteOperator assemble(const Grid& grid, const CoefficientField& field);

}  // namespace fracspec
