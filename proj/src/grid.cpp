#include "fracspec/grid.hpp"

#include <cmath>

#include "fracspec/error.hpp"

namespace fracspec {

std::string to_string(Boundary b) {
  return b == Boundary::dirichlet ? "dirichlet" : "periodic";
}

Boundary parse_boundary(std::string_view name) {
  if (name == "dirichlet") return Boundary::dirichlet;
  if (name == "periodic") return Boundary::periodic;
  throw InvalidArgument("unknown boundary '" + std::string(name) +
                        "' (expected dirichlet or periodic)");
}

Grid::Grid(int dim, int points_per_axis, double half_length, Boundary boundary)
    : dim_(dim), n_(points_per_axis), half_length_(half_length), boundary_(boundary) {
  if (dim != 1 && dim != 2)
    throw InvalidArgument("grid dimension must be 1 or 2, got " + std::to_string(dim));
  if (points_per_axis < 3)
    throw InvalidArgument("grid needs at least 3 points per axis, got " +
                          std::to_string(points_per_axis));
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw InvalidArgument("grid half length must be positive");
  spacing_ = boundary == Boundary::dirichlet ? 2.0 * half_length / (points_per_axis - 1)
                                             : 2.0 * half_length / points_per_axis;
}

std::size_t Grid::node_count() const noexcept {
  return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
}

int Grid::dofs_per_axis() const noexcept {
  return boundary_ == Boundary::dirichlet ? n_ - 2 : n_;
}

std::size_t Grid::dof_count() const noexcept {
  const auto m = static_cast<std::size_t>(dofs_per_axis());
  return dim_ == 1 ? m : m * m;
}

double Grid::cell_volume() const noexcept {
  return dim_ == 1 ? spacing_ : spacing_ * spacing_;
}

AxisIndex Grid::node_axes(std::size_t node) const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  if (dim_ == 1) return {static_cast<int>(node), 0};
  return {static_cast<int>(node % n), static_cast<int>(node / n)};
}

std::size_t Grid::node_index(AxisIndex axes) const noexcept {
  return dim_ == 1 ? static_cast<std::size_t>(axes[0])
                   : static_cast<std::size_t>(axes[1]) * n_ + axes[0];
}

Point Grid::node_position(std::size_t node) const noexcept {
  const auto ax = node_axes(node);
  return {coordinate(ax[0]), dim_ == 1 ? 0.0 : coordinate(ax[1])};
}

AxisIndex Grid::dof_axes(std::size_t dof) const noexcept {
  const auto m = static_cast<std::size_t>(dofs_per_axis());
  const int offset = boundary_ == Boundary::dirichlet ? 1 : 0;
  if (dim_ == 1) return {static_cast<int>(dof) + offset, 0};
  return {static_cast<int>(dof % m) + offset, static_cast<int>(dof / m) + offset};
}

std::size_t Grid::dof_node(std::size_t dof) const noexcept { return node_index(dof_axes(dof)); }

Point Grid::dof_position(std::size_t dof) const noexcept {
  return node_position(dof_node(dof));
}

std::optional<std::size_t> Grid::node_dof(AxisIndex axes) const noexcept {
  const int offset = boundary_ == Boundary::dirichlet ? 1 : 0;
  const int m = dofs_per_axis();
  for (int d = 0; d < dim_; ++d) {
    const int k = axes[d] - offset;
    if (k < 0 || k >= m) return std::nullopt;
  }
  const auto ix = static_cast<std::size_t>(axes[0] - offset);
  if (dim_ == 1) return ix;
  return static_cast<std::size_t>(axes[1] - offset) * m + ix;
}

int Grid::wrap(int i) const noexcept {
  if (boundary_ != Boundary::periodic) return i;
  return ((i % n_) + n_) % n_;
}

double Grid::norm(const Eigen::VectorXd& f) const {
  return std::sqrt(cell_volume()) * f.norm();
}

double Grid::norm(const Eigen::VectorXcd& f) const {
  return std::sqrt(cell_volume()) * f.norm();
}

double Grid::dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return cell_volume() * f.dot(g);
}

Grid build_grid(int dim, int points_per_axis, double half_length, Boundary boundary) {
  return Grid(dim, points_per_axis, half_length, boundary);
}

Grid with_points(const Grid& grid, int points_per_axis) {
  return Grid(grid.dim(), points_per_axis, grid.half_length(), grid.boundary());
}

}  // namespace fracspec
