#include "fracspec/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracspec/error.hpp"

namespace fracspec {

SpectralDecomposition::SpectralDecomposition(Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors,
                                             std::shared_ptr<const DiscreteOperator> source)
    : values_(std::move(eigenvalues)),
      vectors_(std::move(eigenvectors)),
      source_(std::move(source)),
      cell_volume_(source_ ? source_->grid().cell_volume() : 1.0) {
  if (values_.size() == 0 || vectors_.rows() != values_.size() || vectors_.cols() != values_.size())
    throw InvalidArgument("eigenpair dimensions are inconsistent");
  for (Eigen::Index i = 1; i < values_.size(); ++i)
    if (values_(i) < values_(i - 1)) throw InvalidArgument("eigenvalues must be nondecreasing");
}

SpectralDecomposition SpectralDecomposition::from_eigenpairs(Eigen::VectorXd eigenvalues,
                                                             Eigen::MatrixXd eigenvectors,
                                                             double cell_volume) {
  SpectralDecomposition dec(std::move(eigenvalues), std::move(eigenvectors), nullptr);
  dec.cell_volume_ = cell_volume;
  return dec;
}

Eigen::VectorXcd SpectralDecomposition::to_modes(const Eigen::VectorXcd& f) const {
  Eigen::VectorXcd c(f.size());
  c.real() = vectors_.transpose() * f.real();
  c.imag() = vectors_.transpose() * f.imag();
  return c;
}

Eigen::VectorXcd SpectralDecomposition::from_modes(const Eigen::VectorXcd& c) const {
  Eigen::VectorXcd f(c.size());
  f.real() = vectors_ * c.real();
  f.imag() = vectors_ * c.imag();
  return f;
}

double SpectralDecomposition::norm(const Eigen::VectorXd& f) const {
  return std::sqrt(cell_volume_) * f.norm();
}

double SpectralDecomposition::norm(const Eigen::VectorXcd& f) const {
  return std::sqrt(cell_volume_) * f.norm();
}

SpectralDecomposition eigendecompose(const DiscreteOperator& op, const EigenOptions& options) {
  const auto n = op.size();
  if (n > options.max_dofs) {
    std::ostringstream os;
    os << "operator has " << n << " DOFs, above the dense eigensolver cap of "
       << options.max_dofs << "; reduce the number of grid points";
    throw InvalidArgument(os.str());
  }
  Eigen::MatrixXd a = op.dense();
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  const auto ni = static_cast<lapack_int>(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', ni, a.data(), ni, w.data());
  if (info != 0)
    throw NumericalError("dsyevd failed with info = " + std::to_string(info));

  const double top = std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
  const double ratio = top > 0.0 ? w(0) / top : 0.0;
  if (ratio < -1e-10) {
    std::ostringstream os;
    os << "operator is not nonnegative: smallest eigenvalue " << w(0) << " vs largest " << top;
    throw NumericalError(os.str());
  }
  // Roundoff band around a zero eigenvalue; a positive 1e-14 would otherwise
  // leak into small powers (1e-14^0.25 ~ 3e-4).
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) <= 1e-10 * top) w(i) = 0.0;

  SpectralDecomposition dec(std::move(w), std::move(a), std::make_shared<DiscreteOperator>(op));
  if (options.verify) {
    const auto check = verify(dec);
    if (!check.ok()) {
      std::ostringstream os;
      os << "eigendecomposition failed its self-check: orthonormality "
         << check.orthonormality_error << ", reconstruction " << check.reconstruction_error;
      throw NumericalError(os.str());
    }
  }
  return dec;
}

DecompositionCheck verify(const SpectralDecomposition& dec) {
  const auto& V = dec.eigenvectors();
  const auto& L = dec.eigenvalues();
  const auto n = V.rows();
  DecompositionCheck check{};
  Eigen::MatrixXd gram = V.transpose() * V;
  gram.diagonal().array() -= 1.0;
  check.orthonormality_error = gram.cwiseAbs().maxCoeff();
  const double top = L.cwiseAbs().maxCoeff();
  check.min_eigenvalue_ratio = top > 0.0 ? L(0) / top : 0.0;
  if (dec.source()) {
    Eigen::MatrixXd rec = V * L.asDiagonal() * V.transpose();
    rec -= dec.source()->dense();
    check.reconstruction_error = rec.cwiseAbs().maxCoeff() / std::max(top, 1e-300);
  } else {
    check.reconstruction_error = 0.0;
  }
  (void)n;
  return check;
}

Eigen::VectorXcd spectral_multipliers(const SpectralDecomposition& dec, const ScalarMap& map) {
  const auto& L = dec.eigenvalues();
  Eigen::VectorXcd m(L.size());
  for (Eigen::Index i = 0; i < L.size(); ++i) {
    m(i) = map(L(i));
    if (!std::isfinite(m(i).real()) || !std::isfinite(m(i).imag())) {
      std::ostringstream os;
      os << "scalar map '" << map.name() << "' is singular at eigenvalue lambda[" << i
         << "] = " << L(i);
      throw SingularityError(os.str(), static_cast<std::size_t>(i), L(i));
    }
  }
  return m;
}

Eigen::VectorXcd apply_function(const SpectralDecomposition& dec, const ScalarMap& map,
                                const Eigen::VectorXcd& f) {
  if (static_cast<std::size_t>(f.size()) != dec.size())
    throw InvalidArgument("state vector length does not match the decomposition");
  const Eigen::VectorXcd m = spectral_multipliers(dec, map);
  return dec.from_modes(Eigen::VectorXcd(m.cwiseProduct(dec.to_modes(f))));
}

Eigen::VectorXcd apply_function(const SpectralDecomposition& dec, const ScalarMap& map,
                                const Eigen::VectorXd& f) {
  if (static_cast<std::size_t>(f.size()) != dec.size())
    throw InvalidArgument("state vector length does not match the decomposition");
  const Eigen::VectorXcd m = spectral_multipliers(dec, map);
  const Eigen::VectorXd c = dec.to_modes(f);
  Eigen::VectorXd re = m.real().cwiseProduct(c);
  Eigen::VectorXd im = m.imag().cwiseProduct(c);
  Eigen::VectorXcd out(f.size());
  out.real() = dec.from_modes(re);
  out.imag() = dec.from_modes(im);
  return out;
}

Eigen::VectorXd apply_real(const SpectralDecomposition& dec, const ScalarMap& map,
                           const Eigen::VectorXd& f) {
  if (!map.is_real())
    throw InvalidArgument("scalar map '" + map.name() + "' is complex valued");
  if (static_cast<std::size_t>(f.size()) != dec.size())
    throw InvalidArgument("state vector length does not match the decomposition");
  const Eigen::VectorXd m = spectral_multipliers(dec, map).real();
  return dec.from_modes(Eigen::VectorXd(m.cwiseProduct(dec.to_modes(f))));
}

namespace {

void require_nonnegative_alpha(double alpha) {
  if (!(alpha >= 0.0))
    throw InvalidArgument(
        "fractional power needs alpha >= 0; use shifted_power for inverse powers");
}

}  // namespace

Eigen::VectorXd fractional_power(const SpectralDecomposition& dec, double alpha,
                                 const Eigen::VectorXd& f) {
  require_nonnegative_alpha(alpha);
  return apply_real(dec, ScalarMap::power(alpha), f);
}

Eigen::VectorXcd fractional_power(const SpectralDecomposition& dec, double alpha,
                                  const Eigen::VectorXcd& f) {
  require_nonnegative_alpha(alpha);
  return apply_function(dec, ScalarMap::power(alpha), f);
}

Eigen::VectorXcd unitary_propagate(const SpectralDecomposition& dec, double alpha, double t,
                                   const Eigen::VectorXcd& f) {
  return apply_function(dec, ScalarMap::unitary_frac(t, alpha), f);
}

Eigen::VectorXcd viscous_propagate(const SpectralDecomposition& dec, double alpha, double eps,
                                   double t, const Eigen::VectorXcd& f) {
  if (!(eps >= 0.0) || !(t >= 0.0))
    throw InvalidArgument("viscous propagator needs eps >= 0 and t >= 0");
  return apply_function(dec, ScalarMap::viscous(eps, t, alpha), f);
}

SmoothingBound smoothing_bound(const SpectralDecomposition& dec, double eps, double t) {
  if (!(eps * t > 0.0)) throw InvalidArgument("smoothing bound needs eps * t > 0");
  SmoothingBound out{};
  const auto& L = dec.eigenvalues();
  out.measured = 0.0;
  for (Eigen::Index i = 0; i < L.size(); ++i)
    out.measured = std::max(out.measured, L(i) * std::exp(-eps * t * L(i) * L(i)));
  out.bound = 1.0 / std::sqrt(2.0 * std::exp(1.0) * eps * t);
  out.lambda_star = 1.0 / std::sqrt(2.0 * eps * t);
  out.lambda_star_in_spectrum = out.lambda_star >= dec.lambda_min() && out.lambda_star <= dec.lambda_max();
  return out;
}

}  // namespace fracspec
