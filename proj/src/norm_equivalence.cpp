#include "fracspec/norm_equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "fracspec/error.hpp"

namespace fracspec {

RatioBracket norm_ratios(const SpectralDecomposition& dec, const BesselPotential& bessel,
                         double alpha, const std::vector<Eigen::VectorXd>& test_set) {
  if (test_set.empty()) throw InvalidArgument("norm equivalence needs a nonempty test set");
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  RatioBracket out{std::numeric_limits<double>::infinity(), 0.0, 0};
  const Grid& grid = bessel.grid();
  for (const auto& f : test_set) {
    const double nf = grid.norm(f);
    if (!(nf > 0.0)) throw InvalidArgument("norm equivalence test function is zero");
    const double num = nf + grid.norm(fractional_power(dec, alpha, f));
    const double den = grid.norm(bessel.apply(2.0 * alpha, f));
    const double r = num / den;
    out.min = std::min(out.min, r);
    out.max = std::max(out.max, r);
    ++out.count;
  }
  return out;
}

RatioBracket norm_ratios(const DiscreteOperator& op, double alpha,
                         const std::vector<Eigen::VectorXd>& test_set) {
  const auto dec = eigendecompose(op);
  const BesselPotential bessel(op.grid());
  return norm_ratios(dec, bessel, alpha, test_set);
}

std::vector<Eigen::VectorXd> make_test_set(const Grid& grid, const SpectralDecomposition& dec,
                                           const TestSetSpec& spec) {
  std::vector<Eigen::VectorXd> set;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double X = grid.half_length();
  const auto n = static_cast<Eigen::Index>(grid.dof_count());
  for (int b = 0; b < spec.bumps; ++b) {
    const double cx = X * (unit(rng) - 0.5);
    const double cy = grid.dim() == 2 ? X * (unit(rng) - 0.5) : 0.0;
    const double w = X * (0.06 + 0.14 * unit(rng));
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto x = grid.dof_position(static_cast<std::size_t>(i));
      const double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
      f(i) = std::exp(-r2 / (w * w));
    }
    set.push_back(std::move(f));
  }
  for (int k : spec.eigen_indices) {
    if (k < 0 || k >= n) throw InvalidArgument("eigenvector index out of range in test set");
    set.push_back(dec.eigenvectors().col(k));
  }
  return set;
}

std::vector<NormEquivalenceReport> norm_equivalence(const CoefficientField& field,
                                                    const std::vector<double>& alphas,
                                                    const TestSetSpec& spec,
                                                    const EigenOptions& eig) {
  const Grid& grid = field.grid();
  const auto dec = eigendecompose(assemble(grid, field), eig);
  const BesselPotential bessel(grid);
  const auto tests = make_test_set(grid, dec, spec);

  const bool refinable = field.kind() != CoefficientKind::tabulated;
  std::vector<RatioBracket> fine_brackets;
  if (refinable) {
    const Grid fine = with_points(grid, 2 * grid.points_per_axis());
    const auto fine_field = make_coefficients(fine, field.kind(), field.params());
    const auto fine_dec = eigendecompose(assemble(fine, fine_field), eig);
    const BesselPotential fine_bessel(fine);
    const auto fine_tests = make_test_set(fine, fine_dec, spec);
    for (double alpha : alphas)
      fine_brackets.push_back(norm_ratios(fine_dec, fine_bessel, alpha, fine_tests));
  }

  std::vector<NormEquivalenceReport> reports;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const auto coarse = norm_ratios(dec, bessel, alphas[a], tests);
    NormEquivalenceReport r;
    r.alpha = alphas[a];
    r.lambda_min = dec.lambda_min();
    r.lambda_max = dec.lambda_max();
    r.ratio_min = coarse.min;
    r.ratio_max = coarse.max;
    r.n_samples = coarse.count;
    if (refinable) {
      const auto& fine = fine_brackets[a];
      r.refinement_drift = std::max(std::abs(fine.min - coarse.min) / coarse.min,
                                    std::abs(fine.max - coarse.max) / coarse.max);
    } else {
      r.refinement_drift = std::numeric_limits<double>::quiet_NaN();
    }
    reports.push_back(r);
  }
  return reports;
}

std::string to_json(const NormEquivalenceReport& r) {
  nlohmann::ordered_json j;
  j["alpha"] = r.alpha;
  j["lambda_min"] = r.lambda_min;
  j["lambda_max"] = r.lambda_max;
  j["ratio_min"] = r.ratio_min;
  j["ratio_max"] = r.ratio_max;
  j["refinement_drift"] = std::isnan(r.refinement_drift) ? nlohmann::ordered_json(nullptr)
                                                         : nlohmann::ordered_json(r.refinement_drift);
  j["n_samples"] = r.n_samples;
  return j.dump(2);
}

}  // namespace fracspec
