#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fracspec/grid.hpp"

namespace fracspec {

enum class CoefficientKind { identity, radial_bump, tabulated };

std::string to_string(CoefficientKind kind);
CoefficientKind parse_coefficient_kind(std::string_view name);

/// Parameters of the analytic coefficient families.
///
/// radial_bump: a(x) = I + scale * exp(-|x|^2 / width^2) * shape,
///              c(x) = c_offset + c_amplitude * exp(-|x|^2 / c_width^2).
/// `shape` is row-major dim x dim; empty means the identity.
struct CoefficientParams {
  double scale = 0.0;
  double width = 1.0;
  std::vector<double> shape;
  double c_amplitude = 0.0;
  double c_width = 1.0;
  double c_offset = 0.0;
};

/// Sampled symmetric coefficient matrix a(x) and potential c(x) on every grid
/// node (boundary nodes included, so that face averages are available).
class CoefficientField {
 public:
  /// Raw field from node tables. No validation: use validate() or
  /// check_hypotheses() to inspect it. `a` holds dim*dim row-major entries per node.
  CoefficientField(const Grid& grid, CoefficientKind kind, CoefficientParams params,
                   std::vector<double> a, std::vector<double> c);

  const Grid& grid() const noexcept { return grid_; }
  CoefficientKind kind() const noexcept { return kind_; }
  const CoefficientParams& params() const noexcept { return params_; }

  double a(std::size_t node, int j, int k) const noexcept {
    return a_[node * dim2_ + static_cast<std::size_t>(j * grid_.dim() + k)];
  }
  double c(std::size_t node) const noexcept { return c_[node]; }

  const std::vector<double>& a_table() const noexcept { return a_; }
  const std::vector<double>& c_table() const noexcept { return c_; }

  /// Smallest eigenvalue of a(x) over all nodes (ellipticity constant).
  double lambda() const noexcept { return lambda_; }

  /// Same field with a constant added to c.
  CoefficientField shifted(double c0) const;

 private:
  Grid grid_;
  CoefficientKind kind_;
  CoefficientParams params_;
  std::size_t dim2_;
  std::vector<double> a_;
  std::vector<double> c_;
  double lambda_;
};

/// Builds an analytic field and validates it; throws CoefficientError naming
/// the offending node when symmetry, ellipticity or c >= 0 fails.
CoefficientField make_coefficients(const Grid& grid, CoefficientKind kind,
                                   const CoefficientParams& params = {});

/// Throws CoefficientError if the field violates a structural hypothesis.
void validate(const CoefficientField& field);

/// Loads a tabulated field from CSV with columns
///   i[,j], a_11[,a_12,a_21,a_22], c
/// (one row per node, optional header line). The result is validated.
CoefficientField load_coefficient_table(const Grid& grid, const std::filesystem::path& path);

/// Writes a field in the format read by load_coefficient_table.
void save_coefficient_table(const CoefficientField& field, const std::filesystem::path& path);

struct RegularityProxy {
  double max_first_derivative = 0.0;
  double max_second_derivative = 0.0;
};

struct HypothesisReport {
  bool symmetric = true;
  std::optional<std::size_t> asymmetric_node;
  double ellipticity_lambda = 0.0;
  std::size_t lambda_node = 0;
  bool c_nonnegative = true;
  std::optional<std::size_t> negative_c_node;
  /// (R, sup_{|x| >= R} sum_jk |a_jk - delta_jk|) at R = X/4, X/2, 3X/4.
  std::vector<std::pair<double, double>> flatness_profile;
  RegularityProxy regularity_proxy;

  bool ok() const noexcept { return symmetric && ellipticity_lambda > 0.0 && c_nonnegative; }
};

/// Reports on the structural hypotheses. Never throws.
HypothesisReport check_hypotheses(const CoefficientField& field);

}  // namespace fracspec
