#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fracspec/coefficients.hpp"
#include "fracspec/config.hpp"
#include "fracspec/discrete_operator.hpp"
#include "fracspec/error.hpp"
#include "fracspec/evolution.hpp"
#include "fracspec/extension.hpp"
#include "fracspec/runner.hpp"
#include "fracspec/spectral.hpp"
#include "fracspec/ucprobe.hpp"

namespace py = pybind11;
using namespace fracspec;

namespace {

Region region(const std::vector<std::pair<double, double>>& box) {
  if (box.empty() || box.size() > 2) throw InvalidArgument("a region needs one (lo, hi) pair per axis");
  Region r;
  for (std::size_t k = 0; k < box.size(); ++k) {
    r.lo[k] = box[k].first;
    r.hi[k] = box[k].second;
  }
  return r;
}

Eigen::MatrixXd positions(const Grid& g) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(g.dof_count()), g.dim());
  for (std::size_t i = 0; i < g.dof_count(); ++i) {
    const auto p = g.dof_position(i);
    for (int d = 0; d < g.dim(); ++d) out(static_cast<Eigen::Index>(i), d) = p[static_cast<std::size_t>(d)];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fracspec core bindings";
  m.attr("__version__") = FRACSPEC_VERSION;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  // InvalidArgument (and ConfigError, which the config layer raises) are ValueErrors too.
  auto invalid = py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", invalid.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

  py::class_<Grid>(m, "Grid")
      .def(py::init([](int dim, int n, double half_length, const std::string& boundary) {
             return build_grid(dim, n, half_length, parse_boundary(boundary));
           }),
           py::arg("dim"), py::arg("n"), py::arg("half_length"), py::arg("boundary") = "dirichlet")
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("n", &Grid::points_per_axis)
      .def_property_readonly("half_length", &Grid::half_length)
      .def_property_readonly("spacing", &Grid::spacing)
      .def_property_readonly("boundary", [](const Grid& g) { return to_string(g.boundary()); })
      .def_property_readonly("dof_count", &Grid::dof_count)
      .def("positions", &positions, "DOF coordinates, shape (dof_count, dim).")
      .def("__repr__", [](const Grid& g) {
        return "Grid(dim=" + std::to_string(g.dim()) + ", n=" + std::to_string(g.points_per_axis()) +
               ", boundary=" + to_string(g.boundary()) + ")";
      });

  py::class_<DiscreteOperator, std::shared_ptr<DiscreteOperator>>(m, "Operator")
      .def_property_readonly("grid", &DiscreteOperator::grid)
      .def_property_readonly("size", &DiscreteOperator::size)
      .def("apply", py::overload_cast<const Eigen::VectorXd&>(&DiscreteOperator::apply, py::const_))
      .def("dense", &DiscreteOperator::dense);

  m.def(
      "operator",
      [](const Grid& g, const std::string& kind, double scale, double width, double c_offset) {
        CoefficientParams p;
        p.scale = scale;
        p.width = width;
        p.c_offset = c_offset;
        return std::make_shared<DiscreteOperator>(assemble(g, make_coefficients(g, parse_coefficient_kind(kind), p)));
      },
      py::arg("grid"), py::arg("kind") = "identity", py::arg("scale") = 0.0, py::arg("width") = 1.0,
      py::arg("c_offset") = 0.0, "Assemble -div(a grad) + c for a built-in coefficient family.");

  py::class_<SpectralDecomposition>(m, "Decomposition")
      .def(py::init([](const DiscreteOperator& op) { return eigendecompose(op); }), py::arg("operator"))
      .def_property_readonly("eigenvalues", &SpectralDecomposition::eigenvalues)
      .def_property_readonly("eigenvectors", &SpectralDecomposition::eigenvectors)
      .def("power",
           py::overload_cast<const SpectralDecomposition&, double, const Eigen::VectorXd&>(&fractional_power),
           py::arg("alpha"), py::arg("f"), "L^alpha f.")
      .def(
          "propagate",
          [](const SpectralDecomposition& d, double alpha, double t, const Eigen::VectorXcd& f) {
            return unitary_propagate(d, alpha, t, f);
          },
          py::arg("alpha"), py::arg("t"), py::arg("f"), "exp(i t L^alpha) f.")
      .def(
          "viscous_propagate",
          [](const SpectralDecomposition& d, double alpha, double eps, double t, const Eigen::VectorXcd& f) {
            return viscous_propagate(d, alpha, eps, t, f);
          },
          py::arg("alpha"), py::arg("eps"), py::arg("t"), py::arg("f"), "exp(t (i L^alpha - eps L^2)) f.");

  py::class_<ExtensionField>(m, "Extension")
      .def_readonly("alpha", &ExtensionField::alpha)
      .def_readonly("base", &ExtensionField::base)
      .def_readonly("power", &ExtensionField::power)
      .def_readonly("y", &ExtensionField::y_nodes)
      .def_readonly("values", &ExtensionField::values)
      .def_property_readonly("converged", [](const ExtensionField& e) { return e.unconverged.empty(); });

  m.def("conormal_constant", &conormal_constant, py::arg("alpha"));
  m.def(
      "extend",
      [](const SpectralDecomposition& d, double alpha, const Eigen::VectorXd& u, std::optional<std::vector<double>> y) {
        const Grid& g = d.source() ? d.source()->grid() : throw InvalidArgument("decomposition has no grid");
        return extend(d, alpha, u, y ? *y : default_ladder(g));
      },
      py::arg("decomposition"), py::arg("alpha"), py::arg("u"), py::arg("y") = py::none());
  m.def(
      "conormal_recover", [](const ExtensionField& e, double tol) { return conormal_recover(e, tol).value; },
      py::arg("extension"), py::arg("tolerance") = 1e-3, "c*_alpha lim y^{1-2alpha} d_y U, which equals L^alpha u.");

  m.def(
      "dichotomy_sweep",
      [](const SpectralDecomposition& d, const std::vector<std::pair<double, double>>& theta,
         const std::vector<std::pair<double, double>>& support, const std::vector<double>& alphas) {
        const auto rows = dichotomy_sweep(d, VanishingSpec{region(theta), region(support)}, alphas);
        py::list out;
        for (const auto& r : rows) {
          py::dict row;
          row["alpha"] = r.alpha;
          row["mass_theta"] = r.mass_theta;
          row["mass_total"] = r.mass_total;
          row["ratio"] = r.ratio;
          out.append(row);
        }
        return out;
      },
      py::arg("decomposition"), py::arg("theta"), py::arg("support"), py::arg("alphas"));

  m.def("estimate_T_star", &estimate_T_star, py::arg("u0_norm"), py::arg("n1"), py::arg("n2"), py::arg("c_est"));

  m.def("_run_config", [](const std::filesystem::path& path) {
    const auto cfg = parse_config(path);
    py::gil_scoped_release release;
    return run(cfg).manifest.dump();
  });
  m.def("_validate_config", [](const std::filesystem::path& path) { return echo_yaml(parse_config(path)); });
}
