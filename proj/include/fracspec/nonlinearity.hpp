#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracspec/grid.hpp"

namespace fracspec {

enum class NonlinearityKind { polynomial_P, gradient_Q };

std::string to_string(NonlinearityKind kind);
NonlinearityKind parse_nonlinearity_kind(const std::string& name);

/// coeff * z^p_z * zbar^p_zbar * prod_j (d_j z)^{p_dz[j]} (d_j zbar)^{p_dzbar[j]}.
///
/// `powers` is laid out as [p_z, p_zbar] for P and
/// [p_z, p_zbar, p_dz_1..p_dz_dim, p_dzbar_1..p_dzbar_dim] for Q.
struct Monomial {
  std::complex<double> coeff;
  std::vector<int> powers;

  int degree() const;
};

/// Polynomial nonlinearity with every term of total degree in [N1, N2].
class Nonlinearity {
 public:
  Nonlinearity() = default;
  /// Validates arity, nonnegative powers and 2 <= N1 <= N2 bounds on every term.
  Nonlinearity(NonlinearityKind kind, std::vector<Monomial> terms, int n1, int n2, int dim = 1);

  NonlinearityKind kind() const noexcept { return kind_; }
  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  int dim() const noexcept { return dim_; }
  bool empty() const noexcept { return terms_.empty(); }
  /// True when some term carries a gradient factor.
  bool uses_gradient() const noexcept;

  /// Pointwise value from z and its gradient (gradient ignored for P).
  std::complex<double> evaluate(std::complex<double> z, const std::array<std::complex<double>, 2>& dz) const;
  /// Collocation on grid values; gradients by centred differences.
  Eigen::VectorXcd evaluate(const Grid& grid, const Eigen::VectorXcd& u) const;
  /// Collocation without a grid; only valid when no term uses a gradient.
  Eigen::VectorXcd evaluate(const Eigen::VectorXcd& u) const;

  /// Symbolic derivative with respect to d_j z. Result has kind gradient_Q and
  /// degree bounds relaxed to the actual term degrees.
  std::vector<Monomial> derivative_wrt_gradient(int j) const;

 private:
  NonlinearityKind kind_ = NonlinearityKind::polynomial_P;
  std::vector<Monomial> terms_;
  int n1_ = 2;
  int n2_ = 2;
  int dim_ = 1;
};

/// The zero nonlinearity (P = 0).
Nonlinearity zero_nonlinearity(NonlinearityKind kind = NonlinearityKind::polynomial_P, int dim = 1);

/// Value of an explicit list of monomials in gradient_Q layout.
std::complex<double> evaluate_terms(const std::vector<Monomial>& terms, int dim,
                                    std::complex<double> z,
                                    const std::array<std::complex<double>, 2>& dz);

/// Centred-difference gradient along `axis` (Dirichlet zeros outside, periodic wrap).
Eigen::VectorXcd centred_gradient(const Grid& grid, const Eigen::VectorXcd& u, int axis);

/// Pointwise state sample (z, grad z) used by the energy-hypothesis check.
struct PointState {
  std::complex<double> z;
  std::array<std::complex<double>, 2> dz;
};

/// Independent complex Gaussian samples of (z, grad z), reproducible from `seed`.
std::vector<PointState> random_point_states(int dim, std::size_t count, std::uint64_t seed);

struct EnergyHypothesisReport {
  double max_imaginary = 0.0;   ///< max |Im dQ/d(d_j z)| over samples and axes
  std::size_t samples = 0;
  bool passed = true;           ///< max_imaginary <= tolerance
};

/// Checks that dQ/d(d_j v) is real at every sample. P kinds pass trivially.
EnergyHypothesisReport check_energy_hypothesis(const Nonlinearity& q,
                                               const std::vector<PointState>& samples,
                                               double tolerance = 1e-10);

}  // namespace fracspec
