#include "fracspec/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fracspec/csv.hpp"
#include "fracspec/error.hpp"

namespace fracspec {

namespace {

constexpr double kSymmetryTol = 1e-12;

// Smallest eigenvalue of the symmetric part of the dim x dim block at `node`.
double min_eigenvalue(const CoefficientField& f, std::size_t node) {
  if (f.grid().dim() == 1) return f.a(node, 0, 0);
  const double p = f.a(node, 0, 0);
  const double q = f.a(node, 1, 1);
  const double r = 0.5 * (f.a(node, 0, 1) + f.a(node, 1, 0));
  return 0.5 * (p + q) - std::sqrt(0.25 * (p - q) * (p - q) + r * r);
}

std::string describe_node(const Grid& grid, std::size_t node) {
  const auto x = grid.node_position(node);
  std::ostringstream os;
  os << "node " << node << " (x=" << x[0];
  if (grid.dim() == 2) os << ", y=" << x[1];
  os << ")";
  return os.str();
}

}  // namespace

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::identity: return "identity";
    case CoefficientKind::radial_bump: return "radial_bump";
    case CoefficientKind::tabulated: return "tabulated";
  }
  return "unknown";
}

CoefficientKind parse_coefficient_kind(std::string_view name) {
  if (name == "identity") return CoefficientKind::identity;
  if (name == "radial_bump") return CoefficientKind::radial_bump;
  if (name == "tabulated") return CoefficientKind::tabulated;
  throw InvalidArgument("unknown coefficient kind '" + std::string(name) + "'");
}

CoefficientField::CoefficientField(const Grid& grid, CoefficientKind kind,
                                   CoefficientParams params, std::vector<double> a,
                                   std::vector<double> c)
    : grid_(grid),
      kind_(kind),
      params_(std::move(params)),
      dim2_(static_cast<std::size_t>(grid.dim() * grid.dim())),
      a_(std::move(a)),
      c_(std::move(c)) {
  if (a_.size() != grid_.node_count() * dim2_ || c_.size() != grid_.node_count())
    throw InvalidArgument("coefficient table size does not match the grid node count");
  lambda_ = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < grid_.node_count(); ++node)
    lambda_ = std::min(lambda_, min_eigenvalue(*this, node));
}

CoefficientField CoefficientField::shifted(double c0) const {
  auto c = c_;
  for (auto& v : c) v += c0;
  auto p = params_;
  p.c_offset += c0;
  return CoefficientField(grid_, kind_, p, a_, std::move(c));
}

CoefficientField make_coefficients(const Grid& grid, CoefficientKind kind,
                                   const CoefficientParams& params) {
  const int dim = grid.dim();
  const std::size_t nodes = grid.node_count();
  const auto dim2 = static_cast<std::size_t>(dim * dim);
  std::vector<double> a(nodes * dim2, 0.0);
  std::vector<double> c(nodes, 0.0);

  switch (kind) {
    case CoefficientKind::identity:
      for (std::size_t node = 0; node < nodes; ++node)
        for (int j = 0; j < dim; ++j) a[node * dim2 + j * dim + j] = 1.0;
      break;
    case CoefficientKind::radial_bump: {
      if (!(params.width > 0.0) || !(params.c_width > 0.0))
        throw InvalidArgument("radial_bump widths must be positive");
      std::vector<double> shape = params.shape;
      if (shape.empty()) {
        shape.assign(dim2, 0.0);
        for (int j = 0; j < dim; ++j) shape[j * dim + j] = 1.0;
      }
      if (shape.size() != dim2)
        throw InvalidArgument("radial_bump shape must have dim*dim entries");
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
          if (shape[j * dim + k] != shape[k * dim + j])
            throw InvalidArgument("radial_bump shape matrix must be symmetric");
      for (std::size_t node = 0; node < nodes; ++node) {
        const auto x = grid.node_position(node);
        const double r2 = x[0] * x[0] + x[1] * x[1];
        const double bump = params.scale * std::exp(-r2 / (params.width * params.width));
        for (int j = 0; j < dim; ++j)
          for (int k = 0; k < dim; ++k)
            a[node * dim2 + j * dim + k] = (j == k ? 1.0 : 0.0) + bump * shape[j * dim + k];
        c[node] = params.c_offset +
                  params.c_amplitude * std::exp(-r2 / (params.c_width * params.c_width));
      }
      break;
    }
    case CoefficientKind::tabulated:
      throw InvalidArgument("tabulated coefficients are loaded with load_coefficient_table");
  }

  CoefficientField field(grid, kind, params, std::move(a), std::move(c));
  validate(field);
  return field;
}

void validate(const CoefficientField& field) {
  const auto report = check_hypotheses(field);
  const Grid& grid = field.grid();
  if (!report.symmetric)
    throw CoefficientError("coefficient matrix is not symmetric at " +
                               describe_node(grid, *report.asymmetric_node),
                           *report.asymmetric_node);
  if (!(report.ellipticity_lambda > 0.0)) {
    std::ostringstream os;
    os << "ellipticity violated at " << describe_node(grid, report.lambda_node)
       << ": smallest eigenvalue of a is " << report.ellipticity_lambda;
    throw CoefficientError(os.str(), report.lambda_node);
  }
  if (!report.c_nonnegative) {
    std::ostringstream os;
    os << "potential c is negative at " << describe_node(grid, *report.negative_c_node)
       << ": c = " << field.c(*report.negative_c_node);
    throw CoefficientError(os.str(), *report.negative_c_node);
  }
}

HypothesisReport check_hypotheses(const CoefficientField& field) {
  HypothesisReport report;
  const Grid& grid = field.grid();
  const int dim = grid.dim();
  const std::size_t nodes = grid.node_count();

  report.ellipticity_lambda = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < nodes; ++node) {
    for (int j = 0; j < dim && report.symmetric; ++j) {
      for (int k = j + 1; k < dim; ++k) {
        const double ajk = field.a(node, j, k);
        const double akj = field.a(node, k, j);
        if (std::abs(ajk - akj) > kSymmetryTol * std::max({1.0, std::abs(ajk), std::abs(akj)})) {
          report.symmetric = false;
          report.asymmetric_node = node;
        }
      }
    }
    const double lam = min_eigenvalue(field, node);
    if (lam < report.ellipticity_lambda) {
      report.ellipticity_lambda = lam;
      report.lambda_node = node;
    }
    if (report.c_nonnegative && !(field.c(node) >= 0.0)) {
      report.c_nonnegative = false;
      report.negative_c_node = node;
    }
  }

  const double X = grid.half_length();
  for (double R : {0.25 * X, 0.5 * X, 0.75 * X}) {
    double sup = 0.0;
    for (std::size_t node = 0; node < nodes; ++node) {
      const auto x = grid.node_position(node);
      if (std::hypot(x[0], x[1]) < R) continue;
      double dev = 0.0;
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
          dev += std::abs(field.a(node, j, k) - (j == k ? 1.0 : 0.0));
      sup = std::max(sup, dev);
    }
    report.flatness_profile.emplace_back(R, sup);
  }

  // Centered differences along each axis; one-sided nodes are skipped on
  // bounded grids.
  const double h = grid.spacing();
  const int n = grid.points_per_axis();
  for (std::size_t node = 0; node < nodes; ++node) {
    const auto ax = grid.node_axes(node);
    for (int d = 0; d < dim; ++d) {
      AxisIndex lo = ax, hi = ax;
      lo[d] = grid.wrap(ax[d] - 1);
      hi[d] = grid.wrap(ax[d] + 1);
      if (lo[d] < 0 || hi[d] >= n) continue;
      const auto nl = grid.node_index(lo);
      const auto nh = grid.node_index(hi);
      for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
          const double am = field.a(nl, j, k), a0 = field.a(node, j, k), ap = field.a(nh, j, k);
          report.regularity_proxy.max_first_derivative =
              std::max(report.regularity_proxy.max_first_derivative, std::abs(ap - am) / (2 * h));
          report.regularity_proxy.max_second_derivative =
              std::max(report.regularity_proxy.max_second_derivative,
                       std::abs(ap - 2 * a0 + am) / (h * h));
        }
      }
    }
  }
  return report;
}

CoefficientField load_coefficient_table(const Grid& grid, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open coefficient table '" + path.string() + "'");
  const int dim = grid.dim();
  const auto dim2 = static_cast<std::size_t>(dim * dim);
  const std::size_t ncols = static_cast<std::size_t>(dim) + dim2 + 1;
  const std::size_t nodes = grid.node_count();
  std::vector<double> a(nodes * dim2, 0.0), c(nodes, 0.0);
  std::vector<bool> seen(nodes, false);

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    std::vector<double> values;
    try {
      for (const auto& cell : cells) values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": non-numeric entry");
    }
    if (values.size() != ncols)
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(ncols) + " columns");
    AxisIndex ax{static_cast<int>(values[0]), dim == 2 ? static_cast<int>(values[1]) : 0};
    for (int d = 0; d < dim; ++d)
      if (ax[d] < 0 || ax[d] >= grid.points_per_axis())
        throw InvalidArgument(path.string() + ":" + std::to_string(lineno) +
                              ": node index out of range");
    const auto node = grid.node_index(ax);
    for (std::size_t e = 0; e < dim2; ++e) a[node * dim2 + e] = values[dim + e];
    c[node] = values[dim + dim2];
    seen[node] = true;
  }
  const auto missing = std::find(seen.begin(), seen.end(), false);
  if (missing != seen.end())
    throw InvalidArgument("coefficient table '" + path.string() + "' misses node " +
                          std::to_string(missing - seen.begin()));
  CoefficientField field(grid, CoefficientKind::tabulated, {}, std::move(a), std::move(c));
  validate(field);
  return field;
}

void save_coefficient_table(const CoefficientField& field, const std::filesystem::path& path) {
  const Grid& grid = field.grid();
  const int dim = grid.dim();
  CsvWriter out(path);
  std::vector<std::string> header{"i"};
  if (dim == 2) header.push_back("j");
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) header.push_back("a_" + std::to_string(j + 1) + std::to_string(k + 1));
  header.push_back("c");
  out.header(header);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto ax = grid.node_axes(node);
    out.integer(ax[0]);
    if (dim == 2) out.integer(ax[1]);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) out.real(field.a(node, j, k));
    out.real(field.c(node));
    out.end_row();
  }
}

}  // namespace fracspec
