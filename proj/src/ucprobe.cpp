#include "fracspec/ucprobe.hpp"

#include <cmath>

#include "fracspec/csv.hpp"
#include "fracspec/error.hpp"
#include "fracspec/parallel.hpp"

namespace fracspec {

namespace {

bool inside(const Grid& grid, const Region& r, const Point& p, double shrink) {
  for (int d = 0; d < grid.dim(); ++d) {
    const auto k = static_cast<std::size_t>(d);
    if (!(p[k] > r.lo[k] + shrink && p[k] < r.hi[k] - shrink)) return false;
  }
  return true;
}

ProbeResult measure(const Grid& grid, double alpha, const Eigen::VectorXd& g,
                    const std::vector<std::size_t>& theta) {
  double sum = 0.0;
  for (auto dof : theta) {
    const double v = g(static_cast<Eigen::Index>(dof));
    sum += v * v;
  }
  ProbeResult r{};
  r.alpha = alpha;
  r.mass_theta = std::sqrt(grid.cell_volume() * sum);
  r.mass_total = grid.norm(g);
  r.ratio = r.mass_total > 0.0 ? r.mass_theta / r.mass_total : 0.0;
  r.theta_dofs = theta.size();
  return r;
}

std::vector<std::size_t> shrunken_theta(const Grid& grid, const VanishingSpec& spec, int widths) {
  auto dofs = region_dofs(grid, spec.theta, widths * grid.spacing());
  if (dofs.empty())
    throw InvalidArgument("Theta holds no grid point after shrinking by " + std::to_string(widths) +
                          " stencil width(s)");
  return dofs;
}

}  // namespace

void validate(const Grid& grid, const VanishingSpec& spec) {
  const double X = grid.half_length();
  bool separated = false;
  for (int d = 0; d < grid.dim(); ++d) {
    const auto k = static_cast<std::size_t>(d);
    for (const Region* r : {&spec.theta, &spec.support}) {
      if (!(r->lo[k] < r->hi[k])) throw InvalidArgument("degenerate spec: empty region");
      if (r->lo[k] < -X || r->hi[k] > X)
        throw InvalidArgument("degenerate spec: region leaves the grid box");
    }
    if (spec.theta.hi[k] < spec.support.lo[k] || spec.support.hi[k] < spec.theta.lo[k])
      separated = true;
  }
  if (!separated) throw InvalidArgument("degenerate spec: Theta touches the bump support");
}

Eigen::VectorXd build_bump(const Grid& grid, const VanishingSpec& spec) {
  validate(grid, spec);
  Eigen::VectorXd f(static_cast<Eigen::Index>(grid.dof_count()));
  for (std::size_t dof = 0; dof < grid.dof_count(); ++dof) {
    const auto p = grid.dof_position(dof);
    double v = 1.0;
    for (int d = 0; d < grid.dim(); ++d) {
      const auto k = static_cast<std::size_t>(d);
      const double c = 0.5 * (spec.support.lo[k] + spec.support.hi[k]);
      const double w = 0.5 * (spec.support.hi[k] - spec.support.lo[k]);
      const double r = (p[k] - c) / w;
      if (std::abs(r) >= 1.0) {
        v = 0.0;
        break;
      }
      const double q = 1.0 - r * r;
      v *= q * q * q * q;
    }
    f(static_cast<Eigen::Index>(dof)) = v;
  }
  return f;
}

std::vector<std::size_t> region_dofs(const Grid& grid, const Region& region, double shrink) {
  std::vector<std::size_t> out;
  for (std::size_t dof = 0; dof < grid.dof_count(); ++dof)
    if (inside(grid, region, grid.dof_position(dof), shrink)) out.push_back(dof);
  return out;
}

ProbeResult nonlocality_probe(const SpectralDecomposition& dec, double alpha,
                              const VanishingSpec& spec) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("nonlocality probe needs alpha in (0,1)");
  if (!dec.source()) throw InvalidArgument("probe needs a decomposition of a grid operator");
  const auto& grid = dec.source()->grid();
  const Eigen::VectorXd f = build_bump(grid, spec);
  return measure(grid, alpha, fractional_power(dec, alpha, f), region_dofs(grid, spec.theta));
}

ProbeResult locality_contrast(const DiscreteOperator& op, int m, const VanishingSpec& spec) {
  if (m != 1 && m != 2) throw InvalidArgument("locality contrast takes m in {1, 2}");
  const auto& grid = op.grid();
  Eigen::VectorXd g = build_bump(grid, spec);
  for (int k = 0; k < m; ++k) g = op.apply(g);
  return measure(grid, m, g, shrunken_theta(grid, spec, m));
}

std::vector<ProbeResult> dichotomy_sweep(const SpectralDecomposition& dec,
                                         const VanishingSpec& spec,
                                         const std::vector<double>& alphas) {
  if (!dec.source()) throw InvalidArgument("sweep needs a decomposition of a grid operator");
  for (double a : alphas)
    if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("sweep alphas must lie in (0,1]");
  const auto& op = *dec.source();
  const auto& grid = op.grid();
  std::vector<ProbeResult> rows(alphas.size());
  if (alphas.empty()) return rows;
  const Eigen::VectorXd f = build_bump(grid, spec);
  const auto theta = shrunken_theta(grid, spec, 1);
  parallel_for(alphas.size(), [&](std::size_t k) {
    const double a = alphas[k];
    const Eigen::VectorXd g = a == 1.0 ? op.apply(f) : fractional_power(dec, a, f);
    rows[k] = measure(grid, a, g, theta);
  });
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<ProbeResult>& rows) {
  CsvWriter out(path);
  out.header({"alpha", "mass_theta", "mass_total", "ratio"});
  for (const auto& r : rows) {
    out.real(r.alpha).real(r.mass_theta).real(r.mass_total).real(r.ratio);
    out.end_row();
  }
}

}  // namespace fracspec
