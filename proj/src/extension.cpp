#include "fracspec/extension.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>
#include <json.hpp>

#include "fracspec/csv.hpp"
#include "fracspec/error.hpp"
#include "fracspec/parallel.hpp"

namespace fracspec {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("extension requires alpha in (0,1), got " + std::to_string(alpha));
}

void require_ladder(const std::vector<double>& y) {
  if (y.empty()) throw InvalidArgument("y ladder is empty");
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(y[k] > 0.0) || !std::isfinite(y[k]))
      throw InvalidArgument("y ladder entries must be positive and finite");
    if (k > 0 && !(y[k] > y[k - 1])) throw InvalidArgument("y ladder must be increasing");
  }
}

// Sum over all faces of (difference / h)^2, times the cell volume. Dirichlet
// boundary nodes carry zero.
double gradient_energy(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int n = grid.points_per_axis();
  const bool periodic = grid.boundary() == Boundary::periodic;
  const int faces = periodic ? n : n - 1;
  auto value = [&](AxisIndex a) {
    const auto dof = grid.node_dof(a);
    return dof ? v(static_cast<Eigen::Index>(*dof)) : 0.0;
  };
  const double inv_h = 1.0 / grid.spacing();
  double sum = 0.0;
  if (grid.dim() == 1) {
    for (int i = 0; i < faces; ++i) {
      const double d = (value({grid.wrap(i + 1), 0}) - value({i, 0})) * inv_h;
      sum += d * d;
    }
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < faces; ++i) {
        const double d = (value({grid.wrap(i + 1), j}) - value({i, j})) * inv_h;
        sum += d * d;
      }
    for (int j = 0; j < faces; ++j)
      for (int i = 0; i < n; ++i) {
        const double d = (value({i, grid.wrap(j + 1)}) - value({i, j})) * inv_h;
        sum += d * d;
      }
  }
  return sum * grid.cell_volume();
}

// Trapezoid in log y of y * f(y) over the ladder.
double log_trapezoid(const std::vector<double>& y, const std::vector<double>& f) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < y.size(); ++k)
    sum += 0.5 * std::log(y[k + 1] / y[k]) * (y[k] * f[k] + y[k + 1] * f[k + 1]);
  return sum;
}

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q * q;
}

double bump_derivative(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -8.0 * s * q * q * q;
}

}  // namespace

double conormal_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("conormal constant requires alpha in (0,1)");
  return std::pow(4.0, alpha) * std::tgamma(alpha) / (2.0 * alpha * std::tgamma(-alpha));
}

ExtensionKernel::ExtensionKernel(double alpha, const QuadratureDescriptor& rule)
    : alpha_(alpha), rule_(rule) {
  require_alpha(alpha);
  if (rule.nodes < 3) throw InvalidArgument("quadrature needs at least 3 nodes");
  if (!(rule.t_min > 0.0 && rule.t_max > rule.t_min))
    throw InvalidArgument("quadrature needs 0 < t_min < t_max");
  log_prefactor_ = -(alpha * std::log(4.0) + std::lgamma(alpha));
  const double a = std::log(rule.t_min);
  const double b = std::log(rule.t_max);
  step_ = (b - a) / (rule.nodes - 1);
  log_t_.resize(static_cast<std::size_t>(rule.nodes));
  for (int j = 0; j < rule.nodes; ++j) log_t_[static_cast<std::size_t>(j)] = a + j * step_;
}

ModeKernel ExtensionKernel::sum(double lambda, double y, int stride) const {
  if (lambda == 0.0) return {1.0, 0.0};
  const double y2 = 0.25 * y * y;
  const double log_y = std::log(y);
  const std::size_t last = (log_t_.size() - 1) / static_cast<std::size_t>(stride) *
                           static_cast<std::size_t>(stride);
  double m = 0.0;
  double f = 0.0;
  for (std::size_t j = 0; j <= last; j += static_cast<std::size_t>(stride)) {
    const double s = log_t_[j];
    const double t = std::exp(s);
    const double w = (j == 0 || j == last) ? 0.5 : 1.0;
    const double core = -t * lambda - y2 / t;
    m += w * std::exp(core - alpha_ * s + 2.0 * alpha_ * log_y + log_prefactor_);
    f += w * std::exp(core + (1.0 - alpha_) * s + log_prefactor_);
  }
  const double h = step_ * stride;
  return {m * h, -2.0 * lambda * f * h};
}

std::vector<double> geometric_ladder(double y0, double ratio, int count) {
  if (!(y0 > 0.0) || !(ratio > 1.0) || count < 1)
    throw InvalidArgument("ladder needs y0 > 0, ratio > 1 and count >= 1");
  std::vector<double> y(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) y[static_cast<std::size_t>(k)] = y0 * std::pow(ratio, k);
  return y;
}

std::vector<double> default_ladder(const Grid& grid) {
  const double y0 = grid.spacing() / 32.0;
  const double ratio = std::pow(2.0, 0.25);
  const double top = 4.0 * grid.half_length();
  const int count = static_cast<int>(std::ceil(std::log(top / y0) / std::log(ratio))) + 1;
  return geometric_ladder(y0, ratio, count);
}

double ExtensionField::norm_at(std::size_t k) const {
  return grid.norm(Eigen::VectorXd(values.col(static_cast<Eigen::Index>(k))));
}

void ExtensionField::write_csv(const std::string& path) const {
  CsvWriter out(path);
  if (grid.dim() == 1)
    out.header({"i", "y", "U"});
  else
    out.header({"i", "j", "y", "U"});
  for (std::size_t k = 0; k < y_nodes.size(); ++k) {
    for (std::size_t dof = 0; dof < grid.dof_count(); ++dof) {
      const auto axes = grid.dof_axes(dof);
      out.integer(axes[0]);
      if (grid.dim() == 2) out.integer(axes[1]);
      out.real(y_nodes[k]);
      out.real(values(static_cast<Eigen::Index>(dof), static_cast<Eigen::Index>(k)));
      out.end_row();
    }
  }
}

std::string ExtensionField::metadata_json() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha;
  j["quadrature"] = {{"rule", "trapezoid_log_t"},
                     {"nodes", quadrature.nodes},
                     {"t_min", quadrature.t_min},
                     {"t_max", quadrature.t_max}};
  j["ladder"] = y_nodes;
  j["unconverged_pairs"] = unconverged.size();
  return j.dump(2);
}

ExtensionField extend(const SpectralDecomposition& dec, double alpha, const Eigen::VectorXd& u,
                      std::vector<double> y_nodes, const ExtensionQuadrature& quadrature) {
  require_alpha(alpha);
  require_ladder(y_nodes);
  if (!dec.source()) throw InvalidArgument("extend needs a decomposition of a grid operator");
  if (static_cast<std::size_t>(u.size()) != dec.size())
    throw InvalidArgument("state size does not match the decomposition");
  if (quadrature.nodes < 3) throw InvalidArgument("quadrature needs at least 3 nodes");

  const auto& lambda = dec.eigenvalues();
  QuadratureDescriptor rule;
  rule.nodes = quadrature.nodes;
  rule.t_min = quadrature.t_min_factor / std::max(dec.lambda_max(), 1e-12);
  // The zero mode has multiplier 1 exactly, so the rule only has to cover the
  // smallest positive eigenvalue.
  double lambda_low = 0.0;
  for (Eigen::Index i = 0; i < lambda.size() && lambda_low == 0.0; ++i) lambda_low = lambda(i);
  rule.t_max = quadrature.t_max_factor / std::max(lambda_low, 1e-12);
  const ExtensionKernel kernel(alpha, rule);

  const auto modes = static_cast<Eigen::Index>(dec.size());
  const auto ny = static_cast<Eigen::Index>(y_nodes.size());
  Eigen::MatrixXd mult(modes, ny);
  Eigen::MatrixXd dflux(modes, ny);
  std::vector<std::vector<QuadratureIssue>> issues(dec.size());

  parallel_for(dec.size(), [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double l = lambda(row);
    const double flux_scale = std::max(1.0, std::pow(l, alpha));
    for (Eigen::Index k = 0; k < ny; ++k) {
      const double y = y_nodes[static_cast<std::size_t>(k)];
      const auto fine = kernel.evaluate(l, y);
      mult(row, k) = fine.multiplier;
      dflux(row, k) = fine.flux;
      if (l == 0.0) continue;
      const auto coarse = kernel.evaluate_coarse(l, y);
      const double dm = std::abs(fine.multiplier - coarse.multiplier) /
                        std::max(std::abs(fine.multiplier), 1e-14);
      const double df = std::abs(fine.flux - coarse.flux) /
                        std::max(std::abs(fine.flux), 1e-14 * flux_scale);
      const double change = std::max(dm, df);
      if (change > 1e-6) issues[i].push_back({i, l, y, change});
    }
  });

  const Eigen::VectorXd coeff = dec.to_modes(u);
  ExtensionField ext{dec.source()->grid(), alpha, u, {}, std::move(y_nodes), {}, {}, rule, {},
                     dec.source_ptr()};
  ext.values = dec.eigenvectors() * (coeff.asDiagonal() * mult);
  ext.flux = dec.eigenvectors() * (coeff.asDiagonal() * dflux);
  ext.power = fractional_power(dec, alpha, u);
  for (auto& v : issues) ext.unconverged.insert(ext.unconverged.end(), v.begin(), v.end());
  return ext;
}

ExtensionField synthetic_extension(const Grid& grid, double alpha, std::vector<double> y_nodes,
                                   Eigen::MatrixXd values) {
  require_alpha(alpha);
  require_ladder(y_nodes);
  if (values.rows() != static_cast<Eigen::Index>(grid.dof_count()) ||
      values.cols() != static_cast<Eigen::Index>(y_nodes.size()))
    throw InvalidArgument("synthetic field shape must be dofs x ladder");
  Eigen::VectorXd base = values.col(0);
  return ExtensionField{grid, alpha, std::move(base), {}, std::move(y_nodes), std::move(values),
                        {},   {},    {},              nullptr};
}

ExtensionChecks check_extension(const ExtensionField& ext) {
  ExtensionChecks out{};
  const double u = ext.grid.norm(ext.base);
  const auto ny = ext.y_nodes.size();
  double prev = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  out.contraction = true;
  for (std::size_t k = 0; k < ny; ++k) {
    const double nk = ext.norm_at(k);
    max_norm = std::max(max_norm, nk);
    if (nk > prev * (1.0 + 1e-12) + 1e-300) out.contraction = false;
    prev = nk;
  }
  if (max_norm > u * (1.0 + 1e-8)) out.contraction = false;
  out.max_norm_ratio = u > 0.0 ? max_norm / u : 0.0;

  out.trace_tolerance =
      10.0 * std::pow(ext.y_nodes.front(), std::min(2.0 * ext.alpha, 1.0)) * u;
  out.trace_ok = true;
  out.trace_errors.fill(0.0);
  for (std::size_t k = 0; k < std::min<std::size_t>(3, ny); ++k) {
    const Eigen::VectorXd d = ext.values.col(static_cast<Eigen::Index>(k)) - ext.base;
    out.trace_errors[k] = ext.grid.norm(d);
    if (k > 0 && out.trace_errors[k] < out.trace_errors[k - 1]) out.trace_ok = false;
  }
  if (out.trace_errors[0] > out.trace_tolerance) out.trace_ok = false;
  return out;
}

RecoveryResult conormal_recover(const ExtensionField& ext, double tolerance) {
  if (ext.flux.size() == 0)
    throw InvalidArgument("conormal recovery needs an extension computed by extend()");
  const auto& y = ext.y_nodes;
  if (y.size() < 3) throw InvalidArgument("conormal recovery needs at least 3 y-nodes");

  // Smallest node plus the first nodes reaching 2 y0 and 4 y0, falling back
  // to consecutive nodes on short ladders.
  std::array<std::size_t, 3> idx{0, 1, 2};
  {
    std::size_t k = 1;
    while (k < y.size() && y[k] < 2.0 * y[0] * (1.0 - 1e-9)) ++k;
    std::size_t m = k + 1;
    while (m < y.size() && y[m] < 4.0 * y[0] * (1.0 - 1e-9)) ++m;
    if (m < y.size()) idx = {0, k, m};
  }

  const double p1 = 2.0 - 2.0 * ext.alpha;
  const double p2 = 2.0;
  const double y0 = y[idx[0]];
  Eigen::Matrix3d a;
  for (int c = 0; c < 3; ++c) {
    const double r = y[idx[static_cast<std::size_t>(c)]] / y0;
    a(0, c) = 1.0;
    a(1, c) = std::pow(r, p1);
    a(2, c) = std::pow(r, p2);
  }
  const Eigen::Vector3d w3 = a.fullPivLu().solve(Eigen::Vector3d(1.0, 0.0, 0.0));
  const double r1 = std::pow(y[idx[1]] / y0, p1);
  const double w2a = r1 / (r1 - 1.0);
  const double w2b = -1.0 / (r1 - 1.0);

  auto col = [&](std::size_t i) { return ext.flux.col(static_cast<Eigen::Index>(idx[i])); };
  RecoveryResult out;
  out.flux_limit = w3(0) * col(0) + w3(1) * col(1) + w3(2) * col(2);
  const Eigen::VectorXd two = w2a * col(0) + w2b * col(1);
  out.value = conormal_constant(ext.alpha) * out.flux_limit;
  out.heights = {y[idx[0]], y[idx[1]], y[idx[2]]};
  const double scale = out.flux_limit.norm();
  out.discrepancy = scale > 0.0 ? (out.flux_limit - two).norm() / scale : 0.0;
  out.diverged = out.discrepancy > 10.0 * tolerance;
  return out;
}

EnergyReport energy_report(const ExtensionField& ext) {
  if (ext.flux.size() == 0)
    throw InvalidArgument("energy report needs an extension computed by extend()");
  const auto& y = ext.y_nodes;
  const double a = ext.alpha;
  const double vol = ext.grid.cell_volume();
  std::vector<double> integrand(y.size());
  double flux0 = 0.0;
  double grad0 = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const double flux_sq = ext.flux.col(c).squaredNorm() * vol;
    const double grad_sq = gradient_energy(ext.grid, ext.values.col(c));
    integrand[k] = std::pow(y[k], 2.0 * a - 1.0) * flux_sq + std::pow(y[k], 1.0 - 2.0 * a) * grad_sq;
    if (k == 0) {
      flux0 = flux_sq;
      grad0 = grad_sq;
    }
  }
  // On [0, y0] the flux and the gradient are frozen at their y0 values.
  const double y0 = y.front();
  const double head = flux0 * std::pow(y0, 2.0 * a) / (2.0 * a) +
                      grad0 * std::pow(y0, 2.0 - 2.0 * a) / (2.0 - 2.0 * a);

  EnergyReport r{};
  r.energy = head + log_trapezoid(y, integrand);
  r.base_norm = ext.grid.norm(ext.base);
  r.power_norm = ext.grid.norm(ext.power);
  const double denom = r.base_norm * r.base_norm + r.power_norm * r.power_norm;
  r.ratio = denom > 0.0 ? r.energy / denom : 0.0;
  return r;
}

std::vector<DoublingEntry> doubling_ratio(const ExtensionField& ext,
                                          const std::vector<double>& radii, Point center) {
  const auto& grid = ext.grid;
  const auto& y = ext.y_nodes;
  const double X = grid.half_length();
  double reach = X - std::abs(center[0]);
  if (grid.dim() == 2) reach = std::min(reach, X - std::abs(center[1]));
  for (double r : radii) {
    if (!(r > 0.0)) throw InvalidArgument("doubling radii must be positive");
    if (2.0 * r > reach + 1e-12 || 2.0 * r > y.back() + 1e-12)
      throw InvalidArgument("doubling radius " + std::to_string(r) +
                            ": the ball of radius 2R leaves the sampled box");
  }

  // Midpoint rule over cells whose centre lies in the half ball. Cell k in y
  // spans [b_k, b_{k+1}] with b_0 = 0 and midpoints in between; its y^{1-2a}
  // weight is integrated exactly since the weight is singular at y = 0.
  const double e = 2.0 - 2.0 * ext.alpha;
  std::vector<double> weight(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double lo = k == 0 ? 0.0 : 0.5 * (y[k - 1] + y[k]);
    const double hi = k + 1 < y.size() ? 0.5 * (y[k] + y[k + 1]) : y[k] + 0.5 * (y[k] - y[k - 1]);
    weight[k] = (std::pow(hi, e) - std::pow(lo, e)) / e;
  }

  const double vol = grid.cell_volume();
  auto mass = [&](double r) {
    const double r2 = r * r;
    double sum = 0.0;
    for (std::size_t dof = 0; dof < grid.dof_count(); ++dof) {
      const auto p = grid.dof_position(dof);
      double d2 = (p[0] - center[0]) * (p[0] - center[0]);
      if (grid.dim() == 2) d2 += (p[1] - center[1]) * (p[1] - center[1]);
      if (d2 >= r2) continue;
      for (std::size_t k = 0; k < y.size() && d2 + y[k] * y[k] < r2; ++k) {
        const double v = ext.values(static_cast<Eigen::Index>(dof), static_cast<Eigen::Index>(k));
        sum += weight[k] * v * v;
      }
    }
    return sum * vol;
  };

  std::vector<DoublingEntry> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const double inner = mass(r);
    if (!(inner > 0.0))
      throw InvalidArgument("degenerate input: zero weighted mass on the half ball of radius " +
                            std::to_string(r));
    out.push_back({r, std::sqrt(mass(2.0 * r) / inner)});
  }
  return out;
}

double weak_residual(const ExtensionField& ext, const std::vector<TestFunction>& tests) {
  if (!ext.source || ext.flux.size() == 0)
    throw InvalidArgument("weak residual needs an extension computed by extend()");
  const auto& grid = ext.grid;
  const auto& y = ext.y_nodes;
  const double a = ext.alpha;
  const double X = grid.half_length();
  const double vol = grid.cell_volume();
  const auto ndof = static_cast<Eigen::Index>(grid.dof_count());
  const auto ny = y.size();

  for (const auto& t : tests) {
    if (!(t.radius_x > 0.0) || !(t.radius_y > 0.0))
      throw InvalidArgument("test function radii must be positive");
    for (int d = 0; d < grid.dim(); ++d)
      if (std::abs(t.center[static_cast<std::size_t>(d)]) + t.radius_x > X + 1e-12)
        throw InvalidArgument("test function support leaves the grid box");
    if (std::exp(-std::pow(y.back() / t.radius_y, 2)) > 1e-14)
      throw InvalidArgument("test function does not vanish at the top of the ladder");
  }

  const RecoveryResult rec = conormal_recover(ext);
  const double u_energy = energy_report(ext).energy;
  if (!(u_energy > 0.0)) return 0.0;

  // K U_k for every ladder height.
  Eigen::MatrixXd ku(ndof, static_cast<Eigen::Index>(ny));
  for (std::size_t k = 0; k < ny; ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    ku.col(c) = ext.source->apply(Eigen::VectorXd(ext.values.col(c)));
  }

  const double head_w = std::pow(y.front(), 2.0 - 2.0 * a) / (2.0 - 2.0 * a);
  double worst = 0.0;
  for (const auto& t : tests) {
    // Sampled x profile and its analytic gradient (squared, summed over axes).
    Eigen::VectorXd phi(ndof);
    Eigen::VectorXd grad_sq(ndof);
    for (Eigen::Index dof = 0; dof < ndof; ++dof) {
      const auto p = grid.dof_position(static_cast<std::size_t>(dof));
      std::array<double, 2> s{(p[0] - t.center[0]) / t.radius_x,
                              grid.dim() == 2 ? (p[1] - t.center[1]) / t.radius_x : 0.0};
      const double b0 = bump(s[0]);
      const double b1 = grid.dim() == 2 ? bump(s[1]) : 1.0;
      phi(dof) = b0 * b1;
      double g = bump_derivative(s[0]) * b1 / t.radius_x;
      grad_sq(dof) = g * g;
      if (grid.dim() == 2) {
        g = b0 * bump_derivative(s[1]) / t.radius_x;
        grad_sq(dof) += g * g;
      }
    }
    const double phi_sq = phi.squaredNorm() * vol;
    const double grad_phi_sq = grad_sq.sum() * vol;

    auto psi = [&](double yy) { return std::exp(-std::pow(yy / t.radius_y, 2)); };
    auto dpsi = [&](double yy) { return -2.0 * yy / (t.radius_y * t.radius_y) * psi(yy); };

    // W = int [F psi' <1,phi F> + y^{1-2a} psi <K U, phi>] dy + psi(0) <F0, phi>.
    std::vector<double> form(ny);
    std::vector<double> norm_sq(ny);
    double flux_head = 0.0;
    double form_head = 0.0;
    for (std::size_t k = 0; k < ny; ++k) {
      const auto c = static_cast<Eigen::Index>(k);
      const double wy = std::pow(y[k], 1.0 - 2.0 * a);
      const double fx = ext.flux.col(c).dot(phi) * vol;
      const double kx = ku.col(c).dot(phi) * vol;
      form[k] = fx * dpsi(y[k]) + wy * kx * psi(y[k]);
      norm_sq[k] = wy * (dpsi(y[k]) * dpsi(y[k]) * phi_sq + psi(y[k]) * psi(y[k]) * grad_phi_sq);
      if (k == 0) {
        flux_head = fx * (psi(y[0]) - psi(0.0));
        form_head = kx * psi(y[0]) * head_w;
      }
    }
    const double boundary = rec.flux_limit.dot(phi) * vol * psi(0.0);
    const double w = flux_head + form_head + log_trapezoid(y, form) + boundary;
    const double xi_energy =
        log_trapezoid(y, norm_sq) + grad_phi_sq * head_w;  // psi' vanishes at 0
    if (!(xi_energy > 0.0)) continue;
    worst = std::max(worst, std::abs(w) / std::sqrt(u_energy * xi_energy));
  }
  return worst;
}

}  // namespace fracspec
