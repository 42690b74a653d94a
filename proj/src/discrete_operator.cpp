#include "fracspec/discrete_operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "fracspec/error.hpp"

namespace fracspec {

namespace {

class UpperAccumulator {
 public:
  explicit UpperAccumulator(std::size_t n) : diag_(n, 0.0) {}

  void add(std::size_t p, std::size_t q, double v) {
    if (p == q) {
      diag_[p] += v;
    } else {
      // Each unordered pair is visited symmetrically by the callers; keep the
      // strict upper part only.
      if (p < q) off_.emplace_back(static_cast<int>(p), static_cast<int>(q), v);
    }
  }

  SparseMatrix build() const {
    const auto n = static_cast<Eigen::Index>(diag_.size());
    SparseMatrix upper(n, n);
    upper.setFromTriplets(off_.begin(), off_.end());
    SparseMatrix lower = upper.transpose();
    SparseMatrix d(n, n);
    std::vector<Eigen::Triplet<double>> dt;
    dt.reserve(diag_.size());
    for (std::size_t i = 0; i < diag_.size(); ++i)
      dt.emplace_back(static_cast<int>(i), static_cast<int>(i), diag_[i]);
    d.setFromTriplets(dt.begin(), dt.end());
    SparseMatrix full = upper + lower + d;
    full.makeCompressed();
    return full;
  }

 private:
  std::vector<double> diag_;
  std::vector<Eigen::Triplet<double>> off_;
};

}  // namespace

DiscreteOperator::DiscreteOperator(Grid grid, CoefficientField field, SparseMatrix matrix)
    : grid_(std::move(grid)), field_(std::move(field)), matrix_(std::move(matrix)) {
  gershgorin_ = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < matrix_.outerSize(); ++i) {
    double diag = 0.0, off = 0.0;
    for (SparseMatrix::InnerIterator it(matrix_, i); it; ++it) {
      max_abs_ = std::max(max_abs_, std::abs(it.value()));
      if (it.col() == i)
        diag = it.value();
      else
        off += std::abs(it.value());
    }
    gershgorin_ = std::min(gershgorin_, diag - off);
  }
}

Eigen::VectorXcd DiscreteOperator::apply(const Eigen::VectorXcd& f) const {
  Eigen::VectorXcd out(f.size());
  out.real() = matrix_ * f.real();
  out.imag() = matrix_ * f.imag();
  return out;
}

DiscreteOperator assemble(const Grid& grid, const CoefficientField& field) {
  if (!(field.grid() == grid))
    throw InvalidArgument("coefficient field was sampled on a different grid");
  validate(field);

  const int dim = grid.dim();
  const int n = grid.points_per_axis();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const bool periodic = grid.boundary() == Boundary::periodic;
  UpperAccumulator acc(grid.dof_count());

  // Face term along axis d between nodes `lo` and `hi`.
  auto face = [&](AxisIndex lo, AxisIndex hi, int d) {
    const auto nl = grid.node_index(lo);
    const auto nh = grid.node_index(hi);
    const double af = 0.5 * (field.a(nl, d, d) + field.a(nh, d, d)) * inv_h2;
    const auto pl = grid.node_dof(lo);
    const auto ph = grid.node_dof(hi);
    if (pl) acc.add(*pl, *pl, af);
    if (ph) acc.add(*ph, *ph, af);
    if (pl && ph && *pl != *ph) {
      acc.add(*pl, *ph, -af);
      acc.add(*ph, *pl, -af);
    }
  };

  const int faces_per_axis = periodic ? n : n - 1;
  if (dim == 1) {
    for (int i = 0; i < faces_per_axis; ++i) face({i, 0}, {grid.wrap(i + 1), 0}, 0);
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < faces_per_axis; ++i) face({i, j}, {grid.wrap(i + 1), j}, 0);
    for (int j = 0; j < faces_per_axis; ++j)
      for (int i = 0; i < n; ++i) face({i, j}, {i, grid.wrap(j + 1)}, 1);

    // Mixed term: cell corners ordered (i,j), (i+1,j), (i,j+1), (i+1,j+1).
    // g_x = (Gx . u), g_y = (Gy . u) with Gx = [-1, 1, -1, 1] / 2h and
    // Gy = [-1, -1, 1, 1] / 2h; the cell contributes a12 (Gx^T Gy + Gy^T Gx).
    constexpr std::array<double, 4> gx{-1.0, 1.0, -1.0, 1.0};
    constexpr std::array<double, 4> gy{-1.0, -1.0, 1.0, 1.0};
    for (int j = 0; j < faces_per_axis; ++j) {
      for (int i = 0; i < faces_per_axis; ++i) {
        const std::array<AxisIndex, 4> corners{AxisIndex{i, j}, AxisIndex{grid.wrap(i + 1), j},
                                               AxisIndex{i, grid.wrap(j + 1)},
                                               AxisIndex{grid.wrap(i + 1), grid.wrap(j + 1)}};
        double a12 = 0.0;
        for (const auto& c : corners) {
          const auto node = grid.node_index(c);
          a12 += 0.5 * (field.a(node, 0, 1) + field.a(node, 1, 0));
        }
        a12 *= 0.25;
        if (a12 == 0.0) continue;
        const double scale = a12 * 0.25 * inv_h2;
        std::array<std::optional<std::size_t>, 4> dofs;
        for (int k = 0; k < 4; ++k) dofs[k] = grid.node_dof(corners[k]);
        for (int p = 0; p < 4; ++p) {
          if (!dofs[p]) continue;
          for (int q = 0; q < 4; ++q) {
            if (!dofs[q]) continue;
            const double v = scale * (gx[p] * gy[q] + gy[p] * gx[q]);
            if (v != 0.0) acc.add(*dofs[p], *dofs[q], v);
          }
        }
      }
    }
  }

  for (std::size_t dof = 0; dof < grid.dof_count(); ++dof) {
    const double c = field.c(grid.dof_node(dof));
    if (c != 0.0) acc.add(dof, dof, c);
  }
  return DiscreteOperator(grid, field, acc.build());
}

}  // namespace fracspec
