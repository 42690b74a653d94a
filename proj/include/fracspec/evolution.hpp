#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracspec/bessel.hpp"
#include "fracspec/nonlinearity.hpp"
#include "fracspec/spectral.hpp"

namespace fracspec {

/// Discrete H^s norm. Either ||J^s f|| with the grid Bessel potential, or the
/// graph norm ||f|| + ||L^{s/2} f|| of a decomposition (abstract operators).
class SobolevNorm {
 public:
  static SobolevNorm bessel(std::shared_ptr<const BesselPotential> potential, double s);
  static SobolevNorm graph(const SpectralDecomposition& dec, double s);
  /// Bessel norm on the source grid when there is one, graph norm otherwise.
  static SobolevNorm for_decomposition(const SpectralDecomposition& dec, double s);

  double s() const noexcept { return s_; }
  const std::string& kind() const noexcept { return kind_; }
  double operator()(const Eigen::VectorXcd& f) const { return eval_(f); }
  double operator()(const Eigen::VectorXd& f) const { return eval_(f.cast<std::complex<double>>()); }

 private:
  SobolevNorm(double s, std::string kind, std::function<double(const Eigen::VectorXcd&)> eval)
      : s_(s), kind_(std::move(kind)), eval_(std::move(eval)) {}
  double s_;
  std::string kind_;
  std::function<double(const Eigen::VectorXcd&)> eval_;
};

/// Default monitoring index: 2 in 1D, 4 in 2D.
double default_sobolev_index(int dim);

/// T* = 1 / (8 c (R^{N1-1} + R^{N2-1})) with R = 8 c ||u0||_{s,2}. Returns
/// +infinity for u0 = 0. Throws InvalidArgument unless c_est > 0.
double estimate_T_star(double u0_norm, int n1, int n2, double c_est);

/// Smooth complex probe functions (sums of Gaussian bumps), reproducible from `seed`.
std::vector<Eigen::VectorXcd> smooth_probes(const Grid& grid, std::size_t count,
                                            std::uint64_t seed);

/// max over probes of ||P(f)||_{s,2} / (||f||^{N1} + ||f||^{N2}).
double measure_scheme_constant(const Grid& grid, const Nonlinearity& p, const SobolevNorm& norm,
                               const std::vector<Eigen::VectorXcd>& probes);

struct MonitorRow {
  double time;
  double l2_norm;
  double sobolev_norm;
  double energy;             ///< ||L^{s/2} u||_2
  double residual;           ///< Picard: ||u - Psi(u)||_{s,2}; viscous: fixed-point change
  double equation_residual;  ///< ||i u_t + L^alpha u + P(u)|| / ||u0||; NaN at the ends
  int iterations;
  double epsilon;
};

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXcd states;  ///< time x dof
  std::vector<MonitorRow> monitors;
  /// Picard: sup_t ||u_{k+1} - u_k||_{s,2} per sweep.
  std::vector<double> picard_history;
  /// Largest equation residual over interior time nodes.
  double equation_residual = 0.0;
  double T_star = std::numeric_limits<double>::infinity();
  bool blow_up = false;
  std::size_t energy_flags = 0;
  std::vector<std::string> warnings;

  /// Columns: time, node (DOF index), re, im.
  void write_csv(const std::string& path) const;
  /// Columns: time, l2, sobolev_s, energy, residual, equation_residual, iterations, epsilon.
  void write_monitors_csv(const std::string& path) const;
};

/// max_{k >= 1} r_{k+1} / r_k over residuals above `floor`. 0 when fewer than
/// three residuals are above the floor.
double max_contraction_ratio(const std::vector<double>& history, double floor);

struct PicardOptions {
  double T = 0.1;
  double dt = 1e-3;
  double tol = 1e-10;
  int max_iter = 100;
  /// Keep every k-th time node in the returned trajectory (the last is always kept).
  std::size_t output_stride = 1;
  /// Scheme constant for the T* warning; <= 0 skips the estimate.
  double c_est = 1.0;
};

/// Fixed-point iteration of u = e^{itL^a} u0 + i int_0^t e^{i(t-s)L^a} P(u(s)) ds,
/// i.e. i u_t + L^a u + P(u) = 0, with a cumulative trapezoid in time.
/// Throws ConvergenceError carrying the residual history after max_iter sweeps.
Trajectory picard_solve(const SpectralDecomposition& dec, double alpha, const Eigen::VectorXcd& u0,
                        const Nonlinearity& p, const PicardOptions& options,
                        const SobolevNorm& norm);

struct ViscousOptions {
  double T = 0.1;
  double dt = 1e-3;
  double s = 2.0;
  double c_est = 1.0;
  /// Blow-up when ||u(t)||_{s,2} > envelope_factor * 8 max(c, 1) ||u0||_{s,2}.
  double envelope_factor = 10.0;
  /// Energy flag when d/dt ||L^{s/2} u|| > growth_factor * c (||u||^2 + ||u||^{N2}).
  double growth_factor = 10.0;
  int max_fixed_point = 60;
  double fixed_point_tol = 1e-13;
  std::size_t output_stride = 1;
};

/// Trapezoid Duhamel steps of u_t = (i L^a - eps L^2) u + i Q(u) with the
/// exact viscous propagator; the implicit end point is solved by fixed point.
Trajectory viscous_solve(const SpectralDecomposition& dec, double alpha, double epsilon,
                         const Eigen::VectorXcd& u0, const Nonlinearity& q,
                         const ViscousOptions& options, const SobolevNorm& norm);

struct ViscosityPair {
  double eps;
  double eps_prime;
  double sup_difference;  ///< sup_t ||u^eps - u^eps'||_{2,2}
};

struct ViscosityConvergence {
  std::vector<ViscosityPair> pairs;
  double slope = 0.0;       ///< least-squares K in difference = K (eps - eps')
  double r_squared = 1.0;
  bool blow_up = false;
};

/// Runs viscous_solve for every epsilon (in parallel) and fits the pairwise
/// sup-differences against eps - eps' through the origin. `norm2` measures
/// the differences (an s = 2 norm). Epsilons must be nonincreasing, >= 2 entries.
ViscosityConvergence viscosity_convergence(const SpectralDecomposition& dec, double alpha,
                                           const Eigen::VectorXcd& u0, const Nonlinearity& q,
                                           const ViscousOptions& options,
                                           const std::vector<double>& epsilons,
                                           const SobolevNorm& monitor, const SobolevNorm& norm2);

/// ||J^l(fg)|| / (||f||_inf ||J^l g|| + ||g||_inf ||J^l f||); 0 when f or g vanishes.
double kato_ponce_check(const BesselPotential& bessel, double l, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& g);

struct KatoPonceSweep {
  std::vector<double> ratios;
  double max_ratio = 0.0;
};

/// Ratios over `count` random smooth real pairs.
KatoPonceSweep kato_ponce_sweep(const BesselPotential& bessel, double l, std::size_t count,
                                std::uint64_t seed);

}  // namespace fracspec
