#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace fracspec {

enum class Boundary { dirichlet, periodic };

std::string to_string(Boundary b);
Boundary parse_boundary(std::string_view name);

using Point = std::array<double, 2>;
using AxisIndex = std::array<int, 2>;

/// Uniform tensor grid on [-X, X]^dim.
///
/// Dirichlet grids carry N nodes per axis including both endpoints; the
/// unknowns (DOFs) are the interior nodes. Periodic grids carry N nodes per
/// axis with the right endpoint identified with the left one, and every node
/// is a DOF. DOFs and nodes are numbered with the x index running fastest.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_length, Boundary boundary);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double half_length() const noexcept { return half_length_; }
  double spacing() const noexcept { return spacing_; }
  Boundary boundary() const noexcept { return boundary_; }

  std::size_t node_count() const noexcept;
  std::size_t dof_count() const noexcept;
  int dofs_per_axis() const noexcept;

  /// Coordinate of node i along any axis.
  double coordinate(int i) const noexcept { return -half_length_ + i * spacing_; }

  /// Volume of one grid cell, h^dim. Weight of the discrete L2 inner product.
  double cell_volume() const noexcept;

  AxisIndex node_axes(std::size_t node) const noexcept;
  std::size_t node_index(AxisIndex axes) const noexcept;
  Point node_position(std::size_t node) const noexcept;

  /// Node indices of a DOF.
  AxisIndex dof_axes(std::size_t dof) const noexcept;
  std::size_t dof_node(std::size_t dof) const noexcept;
  Point dof_position(std::size_t dof) const noexcept;
  /// DOF carried by a node; empty for Dirichlet boundary nodes.
  std::optional<std::size_t> node_dof(AxisIndex axes) const noexcept;

  /// Wraps (periodic) or leaves untouched (Dirichlet) an axis index.
  int wrap(int i) const noexcept;

  double norm(const Eigen::VectorXd& f) const;
  double norm(const Eigen::VectorXcd& f) const;
  double dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

  bool operator==(const Grid&) const = default;

 private:
  int dim_;
  int n_;
  double half_length_;
  double spacing_;
  Boundary boundary_;
};

/// Validating constructor: dim in {1,2}, N >= 3, X > 0.
Grid build_grid(int dim, int points_per_axis, double half_length, Boundary boundary);

/// Same grid with the point count replaced; used by refinement studies.
Grid with_points(const Grid& grid, int points_per_axis);

}  // namespace fracspec
