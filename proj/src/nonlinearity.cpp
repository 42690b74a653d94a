#include "fracspec/nonlinearity.hpp"

#include <algorithm>
#include <random>

#include "fracspec/error.hpp"

namespace fracspec {

namespace {

std::complex<double> ipow(std::complex<double> z, int p) {
  std::complex<double> r{1.0, 0.0};
  for (int k = 0; k < p; ++k) r *= z;
  return r;
}

std::size_t arity(NonlinearityKind kind, int dim) {
  return kind == NonlinearityKind::polynomial_P ? 2u : 2u + 2u * static_cast<std::size_t>(dim);
}

}  // namespace

std::string to_string(NonlinearityKind kind) {
  return kind == NonlinearityKind::polynomial_P ? "polynomial_P" : "gradient_Q";
}

NonlinearityKind parse_nonlinearity_kind(const std::string& name) {
  if (name == "polynomial_P") return NonlinearityKind::polynomial_P;
  if (name == "gradient_Q") return NonlinearityKind::gradient_Q;
  throw InvalidArgument("unknown nonlinearity kind '" + name + "'");
}

int Monomial::degree() const {
  int d = 0;
  for (int p : powers) d += p;
  return d;
}

Nonlinearity::Nonlinearity(NonlinearityKind kind, std::vector<Monomial> terms, int n1, int n2,
                           int dim)
    : kind_(kind), terms_(std::move(terms)), n1_(n1), n2_(n2), dim_(dim) {
  if (dim != 1 && dim != 2) throw InvalidArgument("nonlinearity dimension must be 1 or 2");
  if (n1 < 2 || n2 < n1)
    throw InvalidArgument("degrees must satisfy 2 <= N1 <= N2, got N1=" + std::to_string(n1) +
                          " N2=" + std::to_string(n2));
  const auto want = arity(kind, dim);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& m = terms_[t];
    if (m.powers.size() != want)
      throw InvalidArgument("term " + std::to_string(t) + " has " +
                            std::to_string(m.powers.size()) + " powers, expected " +
                            std::to_string(want));
    if (std::any_of(m.powers.begin(), m.powers.end(), [](int p) { return p < 0; }))
      throw InvalidArgument("term " + std::to_string(t) + " has a negative power");
    const int d = m.degree();
    if (d < n1 || d > n2)
      throw InvalidArgument("term " + std::to_string(t) + " has degree " + std::to_string(d) +
                            " outside [" + std::to_string(n1) + ", " + std::to_string(n2) + "]");
  }
}

bool Nonlinearity::uses_gradient() const noexcept {
  if (kind_ == NonlinearityKind::polynomial_P) return false;
  for (const auto& m : terms_)
    for (std::size_t k = 2; k < m.powers.size(); ++k)
      if (m.powers[k] != 0) return true;
  return false;
}

std::complex<double> evaluate_terms(const std::vector<Monomial>& terms, int dim,
                                    std::complex<double> z,
                                    const std::array<std::complex<double>, 2>& dz) {
  std::complex<double> sum{0.0, 0.0};
  const auto zbar = std::conj(z);
  for (const auto& m : terms) {
    auto v = m.coeff * ipow(z, m.powers[0]) * ipow(zbar, m.powers[1]);
    if (m.powers.size() > 2) {
      for (int j = 0; j < dim; ++j) {
        const auto d = dz[static_cast<std::size_t>(j)];
        v *= ipow(d, m.powers[2 + static_cast<std::size_t>(j)]);
        v *= ipow(std::conj(d), m.powers[2 + static_cast<std::size_t>(dim + j)]);
      }
    }
    sum += v;
  }
  return sum;
}

std::complex<double> Nonlinearity::evaluate(std::complex<double> z,
                                            const std::array<std::complex<double>, 2>& dz) const {
  return evaluate_terms(terms_, dim_, z, dz);
}

Eigen::VectorXcd Nonlinearity::evaluate(const Eigen::VectorXcd& u) const {
  if (uses_gradient()) throw InvalidArgument("gradient nonlinearity needs a grid");
  Eigen::VectorXcd out(u.size());
  const std::array<std::complex<double>, 2> none{};
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = evaluate(u(i), none);
  return out;
}

Eigen::VectorXcd Nonlinearity::evaluate(const Grid& grid, const Eigen::VectorXcd& u) const {
  if (!uses_gradient()) return evaluate(u);
  if (grid.dim() != dim_) throw InvalidArgument("nonlinearity dimension does not match the grid");
  std::array<Eigen::VectorXcd, 2> grad;
  for (int j = 0; j < dim_; ++j) grad[static_cast<std::size_t>(j)] = centred_gradient(grid, u, j);
  Eigen::VectorXcd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    std::array<std::complex<double>, 2> dz{};
    for (int j = 0; j < dim_; ++j) dz[static_cast<std::size_t>(j)] = grad[static_cast<std::size_t>(j)](i);
    out(i) = evaluate(u(i), dz);
  }
  return out;
}

std::vector<Monomial> Nonlinearity::derivative_wrt_gradient(int j) const {
  if (j < 0 || j >= dim_) throw InvalidArgument("gradient axis out of range");
  std::vector<Monomial> out;
  if (kind_ == NonlinearityKind::polynomial_P) return out;
  const auto slot = 2 + static_cast<std::size_t>(j);
  for (const auto& m : terms_) {
    const int p = m.powers[slot];
    if (p == 0) continue;
    Monomial d = m;
    d.coeff *= static_cast<double>(p);
    d.powers[slot] = p - 1;
    out.push_back(std::move(d));
  }
  return out;
}

Nonlinearity zero_nonlinearity(NonlinearityKind kind, int dim) {
  return Nonlinearity(kind, {}, 2, 2, dim);
}

Eigen::VectorXcd centred_gradient(const Grid& grid, const Eigen::VectorXcd& u, int axis) {
  if (static_cast<std::size_t>(u.size()) != grid.dof_count())
    throw InvalidArgument("state size does not match the grid");
  if (axis < 0 || axis >= grid.dim()) throw InvalidArgument("gradient axis out of range");
  const double inv = 0.5 / grid.spacing();
  auto value = [&](AxisIndex a) -> std::complex<double> {
    a[static_cast<std::size_t>(axis)] = grid.wrap(a[static_cast<std::size_t>(axis)]);
    const auto dof = grid.node_dof(a);
    return dof ? u(static_cast<Eigen::Index>(*dof)) : std::complex<double>{};
  };
  Eigen::VectorXcd out(u.size());
  for (std::size_t dof = 0; dof < grid.dof_count(); ++dof) {
    AxisIndex hi = grid.dof_axes(dof);
    AxisIndex lo = hi;
    hi[static_cast<std::size_t>(axis)] += 1;
    lo[static_cast<std::size_t>(axis)] -= 1;
    out(static_cast<Eigen::Index>(dof)) = (value(hi) - value(lo)) * inv;
  }
  return out;
}

std::vector<PointState> random_point_states(int dim, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<PointState> out(count);
  for (auto& s : out) {
    s.z = {g(rng), g(rng)};
    for (int j = 0; j < dim; ++j) s.dz[static_cast<std::size_t>(j)] = {g(rng), g(rng)};
  }
  return out;
}

EnergyHypothesisReport check_energy_hypothesis(const Nonlinearity& q,
                                               const std::vector<PointState>& samples,
                                               double tolerance) {
  EnergyHypothesisReport r;
  r.samples = samples.size();
  if (q.kind() == NonlinearityKind::polynomial_P) return r;
  for (int j = 0; j < q.dim(); ++j) {
    const auto d = q.derivative_wrt_gradient(j);
    for (const auto& s : samples)
      r.max_imaginary =
          std::max(r.max_imaginary, std::abs(evaluate_terms(d, q.dim(), s.z, s.dz).imag()));
  }
  r.passed = r.max_imaginary <= tolerance;
  return r;
}

}  // namespace fracspec
