#include "fracspec/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "fracspec/csv.hpp"
#include "fracspec/error.hpp"
#include "fracspec/parallel.hpp"

namespace fracspec {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

// V * C and V^T * C for a real V and complex C.
Eigen::MatrixXcd real_times(const Eigen::MatrixXd& v, const Eigen::MatrixXcd& c) {
  Eigen::MatrixXcd out(v.rows(), c.cols());
  out.real() = v * c.real();
  out.imag() = v * c.imag();
  return out;
}

Eigen::MatrixXcd real_transpose_times(const Eigen::MatrixXd& v, const Eigen::MatrixXcd& c) {
  Eigen::MatrixXcd out(v.cols(), c.cols());
  out.real() = v.transpose() * c.real();
  out.imag() = v.transpose() * c.imag();
  return out;
}

Eigen::VectorXd spectral_power(const Eigen::VectorXd& lambda, double p) {
  Eigen::VectorXd out(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    out(i) = p == 0.0 ? 1.0 : std::pow(lambda(i), p);
  return out;
}

int time_steps(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0) || !std::isfinite(T) || !std::isfinite(dt))
    throw InvalidArgument("time horizon and step must be positive");
  const double m = std::round(T / dt);
  if (m < 1.0 || std::abs(m * dt - T) > 1e-9 * T)
    throw InvalidArgument("T must be an integer multiple of dt");
  return static_cast<int>(m);
}

std::vector<std::size_t> output_indices(int steps, std::size_t stride) {
  if (stride == 0) throw InvalidArgument("output stride must be positive");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j <= static_cast<std::size_t>(steps); j += stride) idx.push_back(j);
  if (idx.back() != static_cast<std::size_t>(steps)) idx.push_back(static_cast<std::size_t>(steps));
  return idx;
}

std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> collocation(
    const SpectralDecomposition& dec, const Nonlinearity& n) {
  if (n.uses_gradient()) {
    if (!dec.source()) throw InvalidArgument("gradient nonlinearity needs a grid operator");
    const Grid* grid = &dec.source()->grid();
    return [grid, &n](const Eigen::VectorXcd& u) { return n.evaluate(*grid, u); };
  }
  return [&n](const Eigen::VectorXcd& u) { return n.evaluate(u); };
}

void require_state(const SpectralDecomposition& dec, const Eigen::VectorXcd& u0) {
  if (static_cast<std::size_t>(u0.size()) != dec.size())
    throw InvalidArgument("initial state size does not match the decomposition");
}

}  // namespace

SobolevNorm SobolevNorm::bessel(std::shared_ptr<const BesselPotential> potential, double s) {
  if (!potential) throw InvalidArgument("null Bessel potential");
  return SobolevNorm(s, "bessel", [potential, s](const Eigen::VectorXcd& f) {
    return potential->sobolev_norm(s, f);
  });
}

SobolevNorm SobolevNorm::graph(const SpectralDecomposition& dec, double s) {
  if (s < 0.0) throw InvalidArgument("Sobolev index must be nonnegative");
  auto vectors = std::make_shared<const Eigen::MatrixXd>(dec.eigenvectors());
  auto weight = std::make_shared<const Eigen::VectorXd>(spectral_power(dec.eigenvalues(), 0.5 * s));
  const double scale = std::sqrt(dec.cell_volume());
  return SobolevNorm(s, "graph", [vectors, weight, scale](const Eigen::VectorXcd& f) {
    Eigen::VectorXcd c(f.size());
    c.real() = vectors->transpose() * f.real();
    c.imag() = vectors->transpose() * f.imag();
    return scale * (c.norm() + weight->cwiseProduct(c).norm());
  });
}

SobolevNorm SobolevNorm::for_decomposition(const SpectralDecomposition& dec, double s) {
  if (dec.source())
    return bessel(std::make_shared<const BesselPotential>(dec.source()->grid()), s);
  return graph(dec, s);
}

double default_sobolev_index(int dim) { return dim == 1 ? 2.0 : 4.0; }

double estimate_T_star(double u0_norm, int n1, int n2, double c_est) {
  if (!(c_est > 0.0)) throw InvalidArgument("c_est must be positive");
  if (n1 < 2 || n2 < n1) throw InvalidArgument("degrees must satisfy 2 <= N1 <= N2");
  if (u0_norm < 0.0) throw InvalidArgument("norm must be nonnegative");
  if (u0_norm == 0.0) return std::numeric_limits<double>::infinity();
  const double r = 8.0 * c_est * u0_norm;
  return 1.0 / (8.0 * c_est * (std::pow(r, n1 - 1) + std::pow(r, n2 - 1)));
}

std::vector<Eigen::VectorXcd> smooth_probes(const Grid& grid, std::size_t count,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(-0.5, 0.5);
  std::uniform_real_distribution<double> width(0.05, 0.15);
  std::normal_distribution<double> amp(0.0, 1.0);
  const double X = grid.half_length();
  std::vector<Eigen::VectorXcd> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.dof_count()));
    for (int b = 0; b < 3; ++b) {
      const Point c{centre(rng) * X, centre(rng) * X};
      const double w = width(rng) * X;
      const cplx a{amp(rng), amp(rng)};
      for (std::size_t dof = 0; dof < grid.dof_count(); ++dof) {
        const auto x = grid.dof_position(dof);
        double r2 = (x[0] - c[0]) * (x[0] - c[0]);
        if (grid.dim() == 2) r2 += (x[1] - c[1]) * (x[1] - c[1]);
        f(static_cast<Eigen::Index>(dof)) += a * std::exp(-r2 / (w * w));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

double measure_scheme_constant(const Grid& grid, const Nonlinearity& p, const SobolevNorm& norm,
                               const std::vector<Eigen::VectorXcd>& probes) {
  double best = 0.0;
  for (const auto& f : probes) {
    const double nf = norm(f);
    if (!(nf > 0.0)) continue;
    const double denom = std::pow(nf, p.n1()) + std::pow(nf, p.n2());
    best = std::max(best, norm(p.evaluate(grid, f)) / denom);
  }
  return best;
}

void Trajectory::write_csv(const std::string& path) const {
  CsvWriter out(path);
  out.header({"time", "node", "re", "im"});
  for (Eigen::Index j = 0; j < states.rows(); ++j)
    for (Eigen::Index i = 0; i < states.cols(); ++i) {
      out.real(times[static_cast<std::size_t>(j)]).integer(i);
      out.real(states(j, i).real()).real(states(j, i).imag());
      out.end_row();
    }
}

void Trajectory::write_monitors_csv(const std::string& path) const {
  CsvWriter out(path);
  out.header({"time", "l2", "sobolev_s", "energy", "residual", "equation_residual", "iterations",
              "epsilon"});
  for (const auto& m : monitors) {
    out.real(m.time).real(m.l2_norm).real(m.sobolev_norm).real(m.energy).real(m.residual);
    out.real(m.equation_residual).integer(m.iterations).real(m.epsilon);
    out.end_row();
  }
}

double max_contraction_ratio(const std::vector<double>& history, double floor) {
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < history.size(); ++k) {
    if (history[k + 1] <= floor || history[k] <= floor) break;
    worst = std::max(worst, history[k + 1] / history[k]);
  }
  return worst;
}

Trajectory picard_solve(const SpectralDecomposition& dec, double alpha, const Eigen::VectorXcd& u0,
                        const Nonlinearity& p, const PicardOptions& options,
                        const SobolevNorm& norm) {
  if (alpha < 0.0) throw InvalidArgument("alpha must be >= 0");
  if (p.kind() != NonlinearityKind::polynomial_P)
    throw InvalidArgument("picard_solve takes a polynomial_P nonlinearity");
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  require_state(dec, u0);
  const int steps = time_steps(options.T, options.dt);
  const double dt = options.T / steps;
  const auto n = static_cast<Eigen::Index>(dec.size());
  const auto& V = dec.eigenvectors();
  const Eigen::VectorXd omega = spectral_power(dec.eigenvalues(), alpha);
  const auto evaluate = collocation(dec, p);

  Trajectory out;
  const double u0_sobolev = norm(u0);
  if (options.c_est > 0.0) {
    out.T_star = estimate_T_star(u0_sobolev, p.n1(), p.n2(), options.c_est);
    if (options.T > out.T_star)
      out.warnings.push_back("T exceeds the contraction time estimate T* = " +
                             format_real(out.T_star));
  }

  // phase(i, j) = e^{i t_j omega_i}
  Eigen::MatrixXcd phase(n, steps + 1);
  for (int j = 0; j <= steps; ++j)
    for (Eigen::Index i = 0; i < n; ++i) phase(i, j) = std::polar(1.0, j * dt * omega(i));

  const Eigen::VectorXcd u0_hat = dec.to_modes(u0);
  Eigen::MatrixXcd modes = phase.array().colwise() * u0_hat.array();
  Eigen::MatrixXcd states = real_times(V, modes);
  Eigen::MatrixXcd forcing(n, steps + 1);
  std::vector<double> last_diff(static_cast<std::size_t>(steps) + 1, 0.0);

  auto nonlinear_modes = [&](const Eigen::MatrixXcd& phys) {
    Eigen::MatrixXcd values(n, phys.cols());
    for (Eigen::Index j = 0; j < phys.cols(); ++j) values.col(j) = evaluate(phys.col(j));
    return real_transpose_times(V, values);
  };

  bool converged = false;
  int sweeps = 0;
  while (sweeps < options.max_iter) {
    ++sweeps;
    forcing = nonlinear_modes(states);
    Eigen::MatrixXcd next(n, steps + 1);
    Eigen::VectorXcd w = u0_hat;
    Eigen::VectorXcd g_prev = phase.col(0).conjugate().cwiseProduct(forcing.col(0));
    next.col(0) = u0_hat;
    for (int j = 1; j <= steps; ++j) {
      const Eigen::VectorXcd g = phase.col(j).conjugate().cwiseProduct(forcing.col(j));
      w += (I * (0.5 * dt)) * (g_prev + g);
      next.col(j) = phase.col(j).cwiseProduct(w);
      g_prev = g;
    }
    const Eigen::MatrixXcd next_states = real_times(V, next);
    double sup = 0.0;
    for (int j = 0; j <= steps; ++j) {
      last_diff[static_cast<std::size_t>(j)] = norm(Eigen::VectorXcd(next_states.col(j) - states.col(j)));
      sup = std::max(sup, last_diff[static_cast<std::size_t>(j)]);
    }
    out.picard_history.push_back(sup);
    modes = next;
    states = next_states;
    if (!std::isfinite(sup)) break;
    if (sup < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("Picard iteration did not converge in " + std::to_string(sweeps) +
                               " sweeps (last residual " +
                               format_real(out.picard_history.back()) +
                               "); T is likely beyond the contraction time",
                           out.picard_history);

  // Residual of i u_t + L^a u + P(u) by centred differences at interior nodes.
  forcing = nonlinear_modes(states);
  const double scale = dec.norm(u0) > 0.0 ? dec.norm(u0) : 1.0;
  const double vol_scale = std::sqrt(dec.cell_volume());
  std::vector<double> eq(static_cast<std::size_t>(steps) + 1,
                         std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j < steps; ++j) {
    const Eigen::VectorXcd r = (I / (2.0 * dt)) * (modes.col(j + 1) - modes.col(j - 1)) +
                               omega.cwiseProduct(modes.col(j)) + forcing.col(j);
    eq[static_cast<std::size_t>(j)] = vol_scale * r.norm() / scale;
    out.equation_residual = std::max(out.equation_residual, eq[static_cast<std::size_t>(j)]);
  }

  const Eigen::VectorXd energy_weight = spectral_power(dec.eigenvalues(), 0.5 * norm.s());
  const auto keep = output_indices(steps, options.output_stride);
  out.states.resize(static_cast<Eigen::Index>(keep.size()), n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto j = static_cast<Eigen::Index>(keep[r]);
    const double t = static_cast<double>(keep[r]) * dt;
    const Eigen::VectorXcd u = states.col(j);
    out.times.push_back(t);
    out.states.row(static_cast<Eigen::Index>(r)) = u.transpose();
    out.monitors.push_back({t, dec.norm(u), norm(u),
                            vol_scale * energy_weight.cwiseProduct(modes.col(j)).norm(),
                            last_diff[keep[r]], eq[keep[r]], sweeps, 0.0});
  }
  return out;
}

Trajectory viscous_solve(const SpectralDecomposition& dec, double alpha, double epsilon,
                         const Eigen::VectorXcd& u0, const Nonlinearity& q,
                         const ViscousOptions& options, const SobolevNorm& norm) {
  if (alpha < 0.0) throw InvalidArgument("alpha must be >= 0");
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  require_state(dec, u0);
  const int steps = time_steps(options.T, options.dt);
  const double dt = options.T / steps;
  const auto n = static_cast<Eigen::Index>(dec.size());
  const auto& lambda = dec.eigenvalues();
  const Eigen::VectorXd omega = spectral_power(lambda, alpha);
  const Eigen::VectorXd energy_weight = spectral_power(lambda, 0.5 * options.s);
  const double vol_scale = std::sqrt(dec.cell_volume());
  const auto evaluate = collocation(dec, q);
  const bool linear = q.empty();

  Eigen::VectorXcd step(n);
  for (Eigen::Index i = 0; i < n; ++i)
    step(i) = std::exp(dt * cplx(-epsilon * lambda(i) * lambda(i), omega(i)));

  auto forcing = [&](const Eigen::VectorXcd& m) -> Eigen::VectorXcd {
    if (linear) return Eigen::VectorXcd::Zero(n);
    return dec.to_modes(evaluate(dec.from_modes(m)));
  };
  auto energy = [&](const Eigen::VectorXcd& m) {
    return vol_scale * energy_weight.cwiseProduct(m).norm();
  };

  Trajectory out;
  const double s0 = norm(u0);
  // The envelope constant also bounds the linear propagator, so it is at least 1.
  const double envelope = options.envelope_factor * 8.0 * std::max(options.c_est, 1.0) * s0;

  Eigen::MatrixXcd modes(n, steps + 1);
  Eigen::MatrixXcd forces(n, steps + 1);
  std::vector<int> iterations(static_cast<std::size_t>(steps) + 1, 0);
  std::vector<double> changes(static_cast<std::size_t>(steps) + 1, 0.0);
  modes.col(0) = dec.to_modes(u0);
  forces.col(0) = forcing(modes.col(0));
  double sobolev_prev = s0;
  double energy_prev = energy(modes.col(0));
  int done = 0;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXcd base =
        step.cwiseProduct(modes.col(k) + (I * (0.5 * dt)) * forces.col(k));
    Eigen::VectorXcd next = base;
    Eigen::VectorXcd f_next = Eigen::VectorXcd::Zero(n);
    int it = 0;
    double change = 0.0;
    if (!linear) {
      f_next = forces.col(k);
      next = base + (I * (0.5 * dt)) * f_next;
      for (it = 1; it <= options.max_fixed_point; ++it) {
        f_next = forcing(next);
        const Eigen::VectorXcd cand = base + (I * (0.5 * dt)) * f_next;
        change = (cand - next).norm() / std::max(cand.norm(), 1e-300);
        next = cand;
        if (change <= options.fixed_point_tol) break;
      }
      if (it > options.max_fixed_point) {
        if (!std::isfinite(change)) {
          out.blow_up = true;
          out.warnings.push_back("non-finite state at t = " + format_real((k + 1) * dt));
          break;
        }
        throw ConvergenceError("implicit trapezoid step did not converge at t = " +
                                   format_real((k + 1) * dt),
                               {change});
      }
      f_next = forcing(next);
    }
    modes.col(k + 1) = next;
    forces.col(k + 1) = f_next;
    iterations[static_cast<std::size_t>(k) + 1] = it;
    changes[static_cast<std::size_t>(k) + 1] = change;
    done = k + 1;

    const Eigen::VectorXcd u = dec.from_modes(next);
    const double sob = norm(u);
    const double e = energy(next);
    if (!std::isfinite(sob) || (s0 > 0.0 && sob > envelope)) {
      out.blow_up = true;
      out.warnings.push_back("Sobolev norm left the 8c||u0|| envelope at t = " +
                             format_real((k + 1) * dt));
      break;
    }
    const double bound = options.c_est * (sobolev_prev * sobolev_prev + std::pow(sobolev_prev, q.n2()));
    const double growth = (e - energy_prev) / dt;
    if (growth > options.growth_factor * bound && e - energy_prev > 1e-12 * std::max(energy_prev, 1e-300))
      ++out.energy_flags;
    sobolev_prev = sob;
    energy_prev = e;
  }

  // i u_t + L^a u + i eps L^2 u + Q(u) = 0 at interior nodes.
  const double scale = dec.norm(u0) > 0.0 ? dec.norm(u0) : 1.0;
  std::vector<double> eq(static_cast<std::size_t>(done) + 1,
                         std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j < done; ++j) {
    Eigen::VectorXcd r = (I / (2.0 * dt)) * (modes.col(j + 1) - modes.col(j - 1)) +
                         omega.cwiseProduct(modes.col(j)) + forces.col(j);
    for (Eigen::Index i = 0; i < n; ++i) r(i) += I * epsilon * lambda(i) * lambda(i) * modes(i, j);
    eq[static_cast<std::size_t>(j)] = vol_scale * r.norm() / scale;
    out.equation_residual = std::max(out.equation_residual, eq[static_cast<std::size_t>(j)]);
  }

  const auto keep = output_indices(done, options.output_stride);
  out.states.resize(static_cast<Eigen::Index>(keep.size()), n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto j = static_cast<Eigen::Index>(keep[r]);
    const double t = static_cast<double>(keep[r]) * dt;
    const Eigen::VectorXcd u = dec.from_modes(Eigen::VectorXcd(modes.col(j)));
    out.times.push_back(t);
    out.states.row(static_cast<Eigen::Index>(r)) = u.transpose();
    out.monitors.push_back({t, dec.norm(u), norm(u), energy(modes.col(j)), changes[keep[r]],
                            eq[keep[r]], iterations[keep[r]], epsilon});
  }
  return out;
}

ViscosityConvergence viscosity_convergence(const SpectralDecomposition& dec, double alpha,
                                           const Eigen::VectorXcd& u0, const Nonlinearity& q,
                                           const ViscousOptions& options,
                                           const std::vector<double>& epsilons,
                                           const SobolevNorm& monitor, const SobolevNorm& norm2) {
  if (epsilons.size() < 2) throw InvalidArgument("viscosity_convergence needs >= 2 epsilons");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) throw InvalidArgument("epsilons must be positive");
    if (k > 0 && epsilons[k] > epsilons[k - 1])
      throw InvalidArgument("epsilons must be nonincreasing");
  }
  std::vector<Trajectory> runs(epsilons.size());
  parallel_for(epsilons.size(), [&](std::size_t k) {
    runs[k] = viscous_solve(dec, alpha, epsilons[k], u0, q, options, monitor);
  });

  ViscosityConvergence out;
  for (const auto& r : runs) out.blow_up = out.blow_up || r.blow_up;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      const auto rows = std::min(runs[a].states.rows(), runs[b].states.rows());
      double sup = 0.0;
      for (Eigen::Index j = 0; j < rows; ++j) {
        const Eigen::VectorXcd d = (runs[a].states.row(j) - runs[b].states.row(j)).transpose();
        sup = std::max(sup, norm2(d));
      }
      out.pairs.push_back({epsilons[a], epsilons[b], sup});
      const double x = epsilons[a] - epsilons[b];
      sxy += x * sup;
      sxx += x * x;
    }
  }
  out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double mean = 0.0;
  for (const auto& p : out.pairs) mean += p.sup_difference;
  mean /= static_cast<double>(out.pairs.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& p : out.pairs) {
    const double fit = out.slope * (p.eps - p.eps_prime);
    ss_res += (p.sup_difference - fit) * (p.sup_difference - fit);
    ss_tot += (p.sup_difference - mean) * (p.sup_difference - mean);
  }
  if (ss_tot > 0.0)
    out.r_squared = 1.0 - ss_res / ss_tot;
  else
    out.r_squared = ss_res <= 1e-300 ? 1.0 : 0.0;
  return out;
}

double kato_ponce_check(const BesselPotential& bessel, double l, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& g) {
  if (!(l > 0.0)) throw InvalidArgument("Kato-Ponce order l must be positive");
  const double f_inf = f.cwiseAbs().maxCoeff();
  const double g_inf = g.cwiseAbs().maxCoeff();
  if (f_inf == 0.0 || g_inf == 0.0) return 0.0;
  const Eigen::VectorXd fg = f.cwiseProduct(g);
  const auto& grid = bessel.grid();
  const double lhs = grid.norm(bessel.apply(l, fg));
  const double rhs = f_inf * grid.norm(bessel.apply(l, g)) + g_inf * grid.norm(bessel.apply(l, f));
  return lhs / rhs;
}

KatoPonceSweep kato_ponce_sweep(const BesselPotential& bessel, double l, std::size_t count,
                                std::uint64_t seed) {
  const auto probes = smooth_probes(bessel.grid(), 2 * count, seed);
  KatoPonceSweep out;
  out.ratios.resize(count);
  parallel_for(count, [&](std::size_t k) {
    out.ratios[k] = kato_ponce_check(bessel, l, probes[2 * k].real(), probes[2 * k + 1].real());
  });
  for (double r : out.ratios) out.max_ratio = std::max(out.max_ratio, r);
  return out;
}

}  // namespace fracspec
