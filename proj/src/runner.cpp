#include "fracspec/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

#include <Eigen/Core>

#include "fracspec/bessel.hpp"
#include "fracspec/coefficients.hpp"
#include "fracspec/csv.hpp"
#include "fracspec/error.hpp"
#include "fracspec/evolution.hpp"
#include "fracspec/extension.hpp"
#include "fracspec/norm_equivalence.hpp"
#include "fracspec/spectral.hpp"
#include "fracspec/ucprobe.hpp"

extern "C" void LAPACKE_ilaver(int* major, int* minor, int* patch);

namespace fracspec {

namespace {

using json = nlohmann::ordered_json;
using cplx = std::complex<double>;

// Keeps NaN/inf out of JSON numbers (they serialise as null otherwise).
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

class Context {
 public:
  Context(const RunConfig& config, std::filesystem::path out)
      : cfg(config),
        out_(std::move(out)),
        grid(build_grid(config.dim, config.n, config.half_length, config.boundary)) {}

  const RunConfig& cfg;

 private:
  std::filesystem::path out_;

 public:
  Grid grid;

  const std::filesystem::path& out() const { return out_; }

  CoefficientField field_on(const Grid& g) const {
    if (cfg.coefficient_kind == CoefficientKind::tabulated)
      return load_coefficient_table(g, cfg.resolve(cfg.table_path));
    return make_coefficients(g, cfg.coefficient_kind, cfg.coefficient_params);
  }

  const SpectralDecomposition& dec(bool verify_checks = true) {
    if (!dec_) {
      const auto op = assemble(grid, field_on(grid));
      dec_.emplace(eigendecompose(op, {4096, verify_checks}));
    }
    return *dec_;
  }

  std::string file(const std::string& name) {
    files.push_back(name);
    return (out_ / name).string();
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream f(file(name), std::ios::binary);
    f << j.dump(2) << "\n";
  }

  void check(const std::string& name, double value, double threshold, const std::string& rel) {
    bool ok = false;
    if (rel == "<=") ok = value <= threshold;
    else if (rel == "<") ok = value < threshold;
    else if (rel == ">=") ok = value >= threshold;
    else if (rel == ">") ok = value > threshold;
    else if (rel == "==") ok = value == threshold;
    invariants.push_back({name, value, threshold, rel, ok});
  }

  std::vector<Invariant> invariants;
  std::vector<std::string> files;
  json summary = json::object();

 private:
  std::optional<SpectralDecomposition> dec_;
};

const json& params(const Context& c) { return c.cfg.task_params; }

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

Point point_or_origin(const json& p) {
  Point out{0.0, 0.0};
  for (std::size_t k = 0; k < p.size() && k < 2; ++k) out[k] = p[k].get<double>();
  return out;
}

Eigen::VectorXcd initial_state(Context& c, const json& spec) {
  const auto& grid = c.grid;
  const std::string profile = spec["profile"].get<std::string>();
  const double amp = spec["amplitude"].get<double>();
  const Point centre = point_or_origin(spec["center"]);
  const double w = spec["width"].get<double>();
  const double k = spec["wavenumber"].get<double>();
  const auto n = static_cast<Eigen::Index>(grid.dof_count());
  Eigen::VectorXcd u(n);
  if (profile == "mode") {
    const auto& d = c.dec();
    const auto idx = spec["mode"].get<Eigen::Index>();
    if (idx >= static_cast<Eigen::Index>(d.size()))
      throw InvalidArgument("task_params.initial.mode exceeds the number of eigenvectors");
    u = (amp / std::sqrt(grid.cell_volume())) * d.eigenvectors().col(idx).cast<cplx>();
    return u;
  }
  if (profile == "random") return amp * smooth_probes(grid, 1, c.cfg.seed).front();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = grid.dof_position(static_cast<std::size_t>(i));
    double r2 = (x[0] - centre[0]) * (x[0] - centre[0]);
    if (grid.dim() == 2) r2 += (x[1] - centre[1]) * (x[1] - centre[1]);
    if (profile == "gaussian") {
      u(i) = amp * std::exp(-r2 / (w * w)) * std::polar(1.0, k * x[0]);
    } else {
      const double q = std::max(0.0, 1.0 - r2 / (w * w));
      u(i) = amp * q * q * q * q;
    }
  }
  return u;
}

Nonlinearity nonlinearity_from(const json& j, int dim) {
  std::vector<Monomial> terms;
  for (const auto& t : j["terms"])
    terms.push_back({{t["coeff_re"].get<double>(), t["coeff_im"].get<double>()},
                     t["powers"].get<std::vector<int>>()});
  return Nonlinearity(parse_nonlinearity_kind(j["kind"].get<std::string>()), std::move(terms),
                      j["n1"].get<int>(), j["n2"].get<int>(), dim);
}

std::vector<double> ladder_from(const Context& c, const json& p) {
  const double y0 = p["y0"].is_null() ? c.grid.spacing() / 32.0 : p["y0"].get<double>();
  const double ratio = p["ratio"].get<double>();
  const double top = p["y_max"].is_null() ? 4.0 * c.grid.half_length() : p["y_max"].get<double>();
  if (!(top > y0)) throw InvalidArgument("task_params.y_max must exceed y0");
  const int count = static_cast<int>(std::ceil(std::log(top / y0) / std::log(ratio))) + 1;
  return geometric_ladder(y0, ratio, count);
}

ExtensionQuadrature quadrature_from(const json& p) {
  ExtensionQuadrature q;
  q.nodes = p["quadrature_nodes"].get<int>();
  q.t_min_factor = p["t_min_factor"].get<double>();
  q.t_max_factor = p["t_max_factor"].get<double>();
  return q;
}

double sobolev_index(const Context& c, const json& p) {
  return p["s"].is_null() ? default_sobolev_index(c.cfg.dim) : p["s"].get<double>();
}

// ---------------------------------------------------------------- tasks

void task_spectrum(Context& c) {
  const auto& p = params(c);
  const auto& d = c.dec(p["verify"].get<bool>());
  const auto check = verify(d);
  const auto hyp = check_hypotheses(d.source()->field());
  const auto count = p["count"].get<std::size_t>() == 0 ? d.size()
                                                          : std::min(d.size(), p["count"].get<std::size_t>());
  {
    CsvWriter csv(c.file("spectrum.csv"));
    csv.header({"index", "eigenvalue"});
    for (std::size_t k = 0; k < count; ++k) {
      csv.integer(static_cast<std::int64_t>(k)).real(d.eigenvalues()(static_cast<Eigen::Index>(k)));
      csv.end_row();
    }
  }
  c.check("orthonormality_error", check.orthonormality_error, 1e-10, "<=");
  c.check("reconstruction_error", check.reconstruction_error, 1e-8, "<=");
  c.check("hypotheses_hold", hyp.ok() ? 1.0 : 0.0, 1.0, "==");

  // Closed form of the constant-coefficient 1D Laplacian.
  const bool plain = c.cfg.coefficient_kind == CoefficientKind::identity && c.cfg.dim == 1;
  if (plain) {
    const double h = c.grid.spacing();
    const auto n = static_cast<Eigen::Index>(d.size());
    std::vector<double> exact;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (c.grid.boundary() == Boundary::dirichlet) {
        const double s = std::sin((k + 1) * M_PI / (2.0 * (n + 1)));
        exact.push_back(4.0 / (h * h) * s * s);
      } else {
        const double s = std::sin(k * M_PI / n);
        exact.push_back(4.0 / (h * h) * s * s);
      }
    }
    std::sort(exact.begin(), exact.end());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double e = exact[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(d.eigenvalues()(k) - e) / std::max(std::abs(e), d.lambda_max() * 1e-16));
    }
    c.check("closed_form_relative_error", worst, 1e-8, "<=");
  }
  json flat = json::array();
  for (const auto& [r, v] : hyp.flatness_profile) flat.push_back({{"R", r}, {"deviation", v}});
  c.write_json("hypotheses.json",
               {{"symmetric", hyp.symmetric},
                {"ellipticity_lambda", hyp.ellipticity_lambda},
                {"lambda_node", hyp.lambda_node},
                {"c_nonnegative", hyp.c_nonnegative},
                {"flatness_profile", flat},
                {"max_first_derivative", hyp.regularity_proxy.max_first_derivative},
                {"max_second_derivative", hyp.regularity_proxy.max_second_derivative},
                {"lambda_min", d.lambda_min()},
                {"lambda_max", d.lambda_max()},
                {"orthonormality_error", check.orthonormality_error},
                {"reconstruction_error", check.reconstruction_error}});
}

void task_funcalc(Context& c) {
  const auto& p = params(c);
  const auto& d = c.dec();
  const auto& op = *d.source();
  const auto samples = p["samples"].get<std::size_t>();
  std::mt19937_64 rng(c.cfg.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::VectorXd> fs(samples, Eigen::VectorXd(static_cast<Eigen::Index>(d.size())));
  for (auto& f : fs)
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = g(rng);

  double composition = 0.0;
  for (const auto& f : fs) {
    const Eigen::VectorXd direct = op.apply(op.apply(f));
    const Eigen::VectorXd spectral = fractional_power(d, 2.0, f);
    composition = std::max(composition, (direct - spectral).norm() / spectral.norm());
  }
  c.check("composition_error", composition, 1e-9, "<=");

  CsvWriter csv(c.file("funcalc.csv"));
  csv.header({"check", "alpha", "t", "s", "value"});
  const auto times = p["times"].get<std::vector<double>>();
  double unitarity = 0.0;
  double group = 0.0;
  for (double a : c.cfg.alphas) {
    for (double t : times) {
      for (const auto& f : fs) {
        const Eigen::VectorXcd fc = f.cast<cplx>();
        const Eigen::VectorXcd ut = unitary_propagate(d, a, t, fc);
        const double err = std::abs(d.norm(ut) / d.norm(fc) - 1.0);
        unitarity = std::max(unitarity, err);
        for (double s : times) {
          const Eigen::VectorXcd lhs = unitary_propagate(d, a, t, unitary_propagate(d, a, s, fc));
          const Eigen::VectorXcd rhs = unitary_propagate(d, a, t + s, fc);
          group = std::max(group, d.norm(Eigen::VectorXcd(lhs - rhs)) / d.norm(fc));
        }
      }
    }
  }
  csv.text("unitarity").text("all").text("all").text("all").real(unitarity);
  csv.end_row();
  csv.text("group_law").text("all").text("all").text("all").real(group);
  csv.end_row();
  c.check("unitarity_error", unitarity, 1e-10, "<=");
  c.check("group_law_error", group, 1e-10, "<=");

  json smoothing = json::array();
  double worst_bound = 0.0;
  double worst_equality = 0.0;
  for (double eps : p["epsilons"].get<std::vector<double>>()) {
    for (double t : p["smoothing_times"].get<std::vector<double>>()) {
      const auto b = smoothing_bound(d, eps, t);
      worst_bound = std::max(worst_bound, b.measured / b.bound);
      if (b.lambda_star_in_spectrum)
        worst_equality = std::max(worst_equality, std::abs(b.measured / b.bound - 1.0));
      smoothing.push_back({{"epsilon", eps},
                           {"t", t},
                           {"measured", b.measured},
                           {"bound", b.bound},
                           {"lambda_star", b.lambda_star},
                           {"lambda_star_in_spectrum", b.lambda_star_in_spectrum}});
    }
  }
  c.check("smoothing_ratio", worst_bound, 1.0 + 1e-10, "<=");
  c.check("smoothing_equality_gap", worst_equality, 0.02, "<=");
  c.write_json("funcalc.json", {{"composition_error", composition},
                                {"unitarity_error", unitarity},
                                {"group_law_error", group},
                                {"smoothing", smoothing}});
}

void task_norm_equiv(Context& c) {
  const auto& p = params(c);
  TestSetSpec spec;
  spec.bumps = p["bumps"].get<int>();
  spec.eigen_indices.clear();
  for (int k = 0; k < p["eigen_modes"].get<int>(); ++k) spec.eigen_indices.push_back(k);
  spec.seed = c.cfg.seed;
  const auto field = c.field_on(c.grid);
  const auto reports = norm_equivalence(field, c.cfg.alphas, spec);
  json out = json::array();
  for (const auto& r : reports) {
    out.push_back(json::parse(to_json(r)));
    if (std::isfinite(r.refinement_drift))
      c.check("refinement_drift_alpha_" + alpha_tag(r.alpha), r.refinement_drift, 0.10, "<=");
  }

  // Constant coefficients: every eigenvector ratio (1 + l^a) / (1 + l)^a lies
  // between 1 and 2^{1-a}.
  const bool plain = c.cfg.coefficient_kind == CoefficientKind::identity;
  json modes = json::array();
  if (plain) {
    const auto& d = c.dec();
    const BesselPotential bessel(c.grid);
    std::vector<Eigen::VectorXd> eig;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d.size()); ++k)
      eig.push_back(d.eigenvectors().col(k));
    for (double a : c.cfg.alphas) {
      const auto b = norm_ratios(d, bessel, a, eig);
      const double lo = std::min(1.0, std::pow(2.0, 1.0 - a));
      const double hi = std::max(1.0, std::pow(2.0, 1.0 - a));
      c.check("mode_ratio_min_alpha_" + alpha_tag(a), b.min, lo - 1e-9, ">=");
      c.check("mode_ratio_max_alpha_" + alpha_tag(a), b.max, hi + 1e-9, "<=");
      modes.push_back({{"alpha", a}, {"ratio_min", b.min}, {"ratio_max", b.max}, {"lower", lo}, {"upper", hi}});
    }
  }
  c.write_json("norm_equiv.json", {{"reports", out}, {"eigenvector_brackets", modes}});
}

ExtensionField extension_for(Context& c, double alpha, const json& p) {
  const Eigen::VectorXd u = initial_state(c, p["initial"]).real();
  return extend(c.dec(), alpha, u, ladder_from(c, p), quadrature_from(p));
}

void task_extend(Context& c) {
  const auto& p = params(c);
  json meta = json::array();
  for (double a : c.cfg.alphas) {
    const auto ext = extension_for(c, a, p);
    const auto chk = check_extension(ext);
    ext.write_csv(c.file("extension_alpha_" + alpha_tag(a) + ".csv"));
    auto m = json::parse(ext.metadata_json());
    m["max_norm_ratio"] = chk.max_norm_ratio;
    m["trace_errors"] = chk.trace_errors;
    m["trace_tolerance"] = chk.trace_tolerance;
    meta.push_back(m);
    const auto tag = "_alpha_" + alpha_tag(a);
    c.check("contraction" + tag, chk.contraction ? 1.0 : 0.0, 1.0, "==");
    c.check("sup_norm_ratio" + tag, chk.max_norm_ratio, 1.0 + 1e-8, "<=");
    c.check("trace_consistency" + tag, chk.trace_ok ? 1.0 : 0.0, 1.0, "==");
    c.check("unconverged_quadrature_pairs" + tag, static_cast<double>(ext.unconverged.size()), 0.0, "==");
  }
  c.write_json("extension.json", meta);
}

void task_recover(Context& c) {
  const auto& p = params(c);
  const double tol = p["tolerance"].get<double>();
  json out = json::array();
  for (double a : c.cfg.alphas) {
    const auto ext = extension_for(c, a, p);
    const auto rec = conormal_recover(ext, tol);
    const double scale = ext.power.norm();
    const double err = scale > 0.0 ? (rec.value - ext.power).norm() / scale : rec.value.norm();
    CsvWriter csv(c.file("recover_alpha_" + alpha_tag(a) + ".csv"));
    csv.header({"dof", "recovered", "spectral"});
    for (Eigen::Index i = 0; i < rec.value.size(); ++i) {
      csv.integer(i).real(rec.value(i)).real(ext.power(i));
      csv.end_row();
    }
    out.push_back({{"alpha", a},
                   {"conormal_constant", conormal_constant(a)},
                   {"relative_error", err},
                   {"discrepancy", rec.discrepancy},
                   {"diverged", rec.diverged},
                   {"heights", rec.heights}});
    const auto tag = "_alpha_" + alpha_tag(a);
    c.check("recovery_relative_error" + tag, err, tol, "<=");
    c.check("extrapolation_converged" + tag, rec.diverged ? 0.0 : 1.0, 1.0, "==");
  }
  c.write_json("recover.json", out);
}

void task_energy(Context& c) {
  const auto& p = params(c);
  const auto probes = smooth_probes(c.grid, p["samples"].get<std::size_t>(), c.cfg.seed);
  const auto ladder = ladder_from(c, p);
  const auto quad = quadrature_from(p);
  json out = json::array();
  for (double a : c.cfg.alphas) {
    const auto base = energy_report(extension_for(c, a, p));
    double lo = HUGE_VAL;
    double hi = 0.0;
    for (const auto& f : probes) {
      const auto r = energy_report(extend(c.dec(), a, f.real(), ladder, quad));
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    out.push_back({{"alpha", a},
                   {"energy", base.energy},
                   {"base_norm", base.base_norm},
                   {"power_norm", base.power_norm},
                   {"ratio", base.ratio},
                   {"sample_ratio_min", lo},
                   {"sample_ratio_max", hi}});
    const auto tag = "_alpha_" + alpha_tag(a);
    c.check("energy_ratio_finite" + tag, std::isfinite(base.ratio) ? 1.0 : 0.0, 1.0, "==");
    c.check("sample_ratio_spread" + tag, lo > 0.0 ? hi / lo : HUGE_VAL, 50.0, "<=");
  }
  c.write_json("energy.json", out);
}

void task_doubling(Context& c) {
  const auto& p = params(c);
  const auto radii = p["radii"].get<std::vector<double>>();
  const Point centre = point_or_origin(p["center"]);
  CsvWriter csv(c.file("doubling.csv"));
  csv.header({"alpha", "field", "radius", "ratio"});
  json out = json::array();
  for (double a : c.cfg.alphas) {
    const auto ext = extension_for(c, a, p);
    const auto rows = doubling_ratio(ext, radii, centre);
    double reference = 0.0;
    double largest_r = 0.0;
    double worst = 0.0;
    for (const auto& r : rows) {
      csv.real(a).text("extension").real(r.radius).real(r.ratio);
      csv.end_row();
      if (r.radius > largest_r) {
        largest_r = r.radius;
        reference = r.ratio;
      }
      worst = std::max(worst, r.ratio);
    }
    json entry = {{"alpha", a}, {"reference_ratio", reference}, {"max_ratio", worst}};
    const auto tag = "_alpha_" + alpha_tag(a);
    c.check("doubling_constant" + tag, worst, 10.0 * reference, "<=");

    if (p["synthetic"].get<bool>()) {
      // Constant field on a uniform cell-centred y grid with spacing h.
      const double h = c.grid.spacing();
      const double top = 2.0 * *std::max_element(radii.begin(), radii.end()) + 2.0 * h;
      std::vector<double> y;
      for (int k = 0; (k + 0.5) * h <= top; ++k) y.push_back((k + 0.5) * h);
      const auto syn = synthetic_extension(
          c.grid, a, y,
          Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(c.grid.dof_count()),
                                static_cast<Eigen::Index>(y.size())));
      const double expected = std::pow(2.0, 0.5 * (c.cfg.dim + 2.0 - 2.0 * a));
      double gap = 0.0;
      for (const auto& r : doubling_ratio(syn, radii, centre)) {
        csv.real(a).text("synthetic_constant").real(r.radius).real(r.ratio);
        csv.end_row();
        gap = std::max(gap, std::abs(r.ratio / expected - 1.0));
      }
      entry["synthetic_expected"] = expected;
      entry["synthetic_relative_gap"] = gap;
      c.check("synthetic_ratio_gap" + tag, gap, 0.01, "<=");
    }
    out.push_back(entry);
  }
  c.write_json("doubling.json", out);
}

void task_picard(Context& c) {
  const auto& p = params(c);
  const auto& d = c.dec();
  const auto nl = nonlinearity_from(p["nonlinearity"], c.cfg.dim);
  const double s = sobolev_index(c, p);
  const auto norm = SobolevNorm::for_decomposition(d, s);
  const Eigen::VectorXcd u0 = initial_state(c, p["initial"]);
  const double c_est = p["c_est"].is_null()
                           ? measure_scheme_constant(c.grid, nl, norm, smooth_probes(c.grid, 16, c.cfg.seed))
                           : p["c_est"].get<double>();
  PicardOptions opt;
  opt.T = p["T"].get<double>();
  opt.dt = p["dt"].get<double>();
  opt.tol = p["tol"].get<double>();
  opt.max_iter = p["max_iter"].get<int>();
  opt.output_stride = p["output_stride"].get<std::size_t>();
  opt.c_est = c_est > 0.0 ? c_est : 0.0;
  json report = {{"c_est", c_est}, {"s", s}};
  c.summary["c_est"] = c_est;
  for (double a : c.cfg.alphas) {
    const auto tag = "_alpha_" + alpha_tag(a);
    const auto traj = picard_solve(d, a, u0, nl, opt, norm);
    traj.write_csv(c.file("trajectory" + tag + ".csv"));
    traj.write_monitors_csv(c.file("monitors" + tag + ".csv"));
    const double floor = 1e3 * 2.2e-16 * std::max(norm(u0), 1e-300);
    const double contraction = max_contraction_ratio(traj.picard_history, floor);
    report[alpha_tag(a)] = {{"T_star", number(traj.T_star)},
                            {"iterations", traj.picard_history.size()},
                            {"residual_history", traj.picard_history},
                            {"max_contraction_ratio", contraction},
                            {"equation_residual", traj.equation_residual},
                            {"warnings", traj.warnings}};
    c.check("equation_residual" + tag, traj.equation_residual, 10.0 * opt.dt * opt.dt, "<=");
    if (opt.T <= traj.T_star) c.check("contraction_ratio" + tag, contraction, 0.5, "<=");
    if (nl.empty()) {
      double drift = 0.0;
      for (const auto& m : traj.monitors) drift = std::max(drift, std::abs(m.l2_norm / traj.monitors.front().l2_norm - 1.0));
      c.check("l2_conservation" + tag, drift, 1e-10, "<=");
    }
  }
  c.write_json("picard.json", report);
}

ViscousOptions viscous_options(const Context& c, const json& p, double s, double c_est) {
  ViscousOptions opt;
  opt.T = p["T"].get<double>();
  opt.dt = p["dt"].get<double>();
  opt.s = s;
  opt.c_est = c_est;
  opt.envelope_factor = p["envelope_factor"].get<double>();
  opt.output_stride = p["output_stride"].get<std::size_t>();
  (void)c;
  return opt;
}

double viscous_c_est(Context& c, const json& p, const Nonlinearity& nl, const SobolevNorm& norm) {
  if (!p["c_est"].is_null()) return p["c_est"].get<double>();
  const double m = nl.empty() ? 0.0 : measure_scheme_constant(c.grid, nl, norm, smooth_probes(c.grid, 16, c.cfg.seed));
  return m > 0.0 ? m : 1.0;
}

void energy_hypothesis_check(Context& c, const Nonlinearity& nl) {
  if (nl.kind() != NonlinearityKind::gradient_Q) return;
  const auto r = check_energy_hypothesis(nl, random_point_states(c.cfg.dim, 256, c.cfg.seed));
  c.summary["energy_hypothesis_max_imaginary"] = r.max_imaginary;
  c.check("energy_hypothesis", r.max_imaginary, 1e-10, "<=");
}

void task_viscous(Context& c) {
  const auto& p = params(c);
  const auto& d = c.dec();
  const auto nl = nonlinearity_from(p["nonlinearity"], c.cfg.dim);
  const double s = sobolev_index(c, p);
  const auto norm = SobolevNorm::for_decomposition(d, s);
  const double c_est = viscous_c_est(c, p, nl, norm);
  const auto opt = viscous_options(c, p, s, c_est);
  const double eps = p["epsilon"].get<double>();
  const Eigen::VectorXcd u0 = initial_state(c, p["initial"]);
  energy_hypothesis_check(c, nl);
  json report = {{"c_est", c_est}, {"s", s}, {"epsilon", eps}};
  bool blow_up = false;
  for (double a : c.cfg.alphas) {
    const auto tag = "_alpha_" + alpha_tag(a);
    const auto traj = viscous_solve(d, a, eps, u0, nl, opt, norm);
    traj.write_csv(c.file("trajectory" + tag + ".csv"));
    traj.write_monitors_csv(c.file("monitors" + tag + ".csv"));
    report[alpha_tag(a)] = {{"blow_up", traj.blow_up},
                            {"energy_flags", traj.energy_flags},
                            {"equation_residual", traj.equation_residual},
                            {"warnings", traj.warnings}};
    blow_up = blow_up || traj.blow_up;
    c.check("energy_growth_flags" + tag, static_cast<double>(traj.energy_flags), 0.0, "==");
    if (nl.empty() && eps > 0.0) {
      double rise = 0.0;
      for (std::size_t k = 1; k < traj.monitors.size(); ++k)
        rise = std::max(rise, traj.monitors[k].l2_norm - traj.monitors[k - 1].l2_norm);
      c.check("l2_nonincreasing" + tag, rise, 1e-14 * std::max(1.0, traj.monitors.front().l2_norm), "<=");
    }
  }
  c.write_json("viscous.json", report);
  if (blow_up) throw NumericalError("viscous solve left the 8c||u0|| envelope (blow-up flag)");
}

void task_viscosity_convergence(Context& c) {
  const auto& p = params(c);
  const auto& d = c.dec();
  const auto nl = nonlinearity_from(p["nonlinearity"], c.cfg.dim);
  const double s = sobolev_index(c, p);
  const auto norm = SobolevNorm::for_decomposition(d, s);
  const auto norm2 = SobolevNorm::for_decomposition(d, 2.0);
  const double c_est = viscous_c_est(c, p, nl, norm);
  const auto opt = viscous_options(c, p, s, c_est);
  const Eigen::VectorXcd u0 = initial_state(c, p["initial"]);
  energy_hypothesis_check(c, nl);
  const auto eps = p["epsilons"].get<std::vector<double>>();
  CsvWriter csv(c.file("viscosity.csv"));
  csv.header({"alpha", "eps", "eps_prime", "sup_difference"});
  json report = json::array();
  bool blow_up = false;
  for (double a : c.cfg.alphas) {
    const auto r = viscosity_convergence(d, a, u0, nl, opt, eps, norm, norm2);
    for (const auto& row : r.pairs) {
      csv.real(a).real(row.eps).real(row.eps_prime).real(row.sup_difference);
      csv.end_row();
    }
    report.push_back({{"alpha", a}, {"slope", r.slope}, {"r_squared", r.r_squared}, {"blow_up", r.blow_up}});
    blow_up = blow_up || r.blow_up;
    c.check("linear_fit_r_squared_alpha_" + alpha_tag(a), r.r_squared, 0.9, ">=");
  }
  c.write_json("viscosity.json", report);
  if (blow_up) throw NumericalError("a viscous member run blew up");
}

VanishingSpec spec_from(const json& p) {
  VanishingSpec s;
  for (std::size_t k = 0; k < p["theta"].size(); ++k) {
    s.theta.lo[k] = p["theta"][k][0].get<double>();
    s.theta.hi[k] = p["theta"][k][1].get<double>();
    s.support.lo[k] = p["support"][k][0].get<double>();
    s.support.hi[k] = p["support"][k][1].get<double>();
  }
  return s;
}

void task_uc_probe(Context& c) {
  const auto& p = params(c);
  const auto& d = c.dec();
  const auto spec = spec_from(p);
  const auto rows = dichotomy_sweep(d, spec, c.cfg.alphas);
  write_sweep_csv(c.file("uc_sweep.csv"), rows);
  for (const auto& r : rows) {
    const auto tag = "_alpha_" + alpha_tag(r.alpha);
    if (r.alpha == 1.0)
      c.check("locality" + tag, r.ratio, 0.0, "==");
    else
      c.check("nonlocality" + tag, r.ratio, 1e-6, ">");
  }
  json report = json::object();
  json contrast = json::array();
  for (int m : {1, 2}) {
    ProbeResult r{};
    try {
      r = locality_contrast(*d.source(), m, spec);
    } catch (const InvalidArgument& e) {
      // Theta too narrow for the wider stencil on this grid.
      contrast.push_back({{"m", m}, {"skipped", e.what()}});
      continue;
    }
    contrast.push_back({{"m", m}, {"mass_theta", r.mass_theta}, {"mass_total", r.mass_total}, {"theta_dofs", r.theta_dofs}});
    c.check("integer_power_locality_m" + std::to_string(m), r.mass_theta,
            1e-12 * r.mass_total, "<=");
  }
  report["locality_contrast"] = contrast;

  if (p["boundary_check"].get<bool>()) {
    // Same spacing on a box twice as large; reported, not gated.
    const int n2 = c.grid.boundary() == Boundary::dirichlet ? 2 * c.grid.points_per_axis() - 1
                                                            : 2 * c.grid.points_per_axis();
    const Grid big = build_grid(c.cfg.dim, n2, 2.0 * c.grid.half_length(), c.grid.boundary());
    json changes = json::array();
    if (big.dof_count() <= 4096) {
      const auto big_dec = eigendecompose(assemble(big, c.field_on(big)), {4096, false});
      const auto big_rows = dichotomy_sweep(big_dec, spec, c.cfg.alphas);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double ref = rows[k].ratio;
        const double change = ref > 0.0 ? std::abs(big_rows[k].ratio / ref - 1.0) : std::abs(big_rows[k].ratio);
        changes.push_back({{"alpha", rows[k].alpha}, {"ratio", ref}, {"ratio_doubled_box", big_rows[k].ratio}, {"relative_change", change}});
      }
      report["boundary_check"] = changes;
    } else {
      report["boundary_check"] = "skipped: doubled box exceeds the dense eigensolver cap";
    }
  }
  c.write_json("uc_probe.json", report);
}

void task_kp_check(Context& c) {
  const auto& p = params(c);
  const double l = p["l"].get<double>();
  const BesselPotential bessel(c.grid);
  const auto sweep = kato_ponce_sweep(bessel, l, p["pairs"].get<std::size_t>(), c.cfg.seed);
  {
    CsvWriter csv(c.file("kp.csv"));
    csv.header({"pair", "ratio"});
    for (std::size_t k = 0; k < sweep.ratios.size(); ++k) {
      csv.integer(static_cast<std::int64_t>(k)).real(sweep.ratios[k]);
      csv.end_row();
    }
  }
  const Eigen::VectorXd f = smooth_probes(c.grid, 1, c.cfg.seed + 1).front().real();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.size());
  const double constant = kato_ponce_check(bessel, l, f, one);
  c.check("constant_factor_ratio", constant, 1.0 + 1e-12, "<=");
  c.check("ratios_finite", std::all_of(sweep.ratios.begin(), sweep.ratios.end(),
                                       [](double r) { return std::isfinite(r); }) ? 1.0 : 0.0,
          1.0, "==");
  c.write_json("kp.json", {{"l", l}, {"pairs", sweep.ratios.size()}, {"max_ratio", sweep.max_ratio},
                           {"constant_factor_ratio", constant}});
}

void dispatch(Context& c) {
  switch (c.cfg.task) {
    case Task::spectrum: return task_spectrum(c);
    case Task::funcalc: return task_funcalc(c);
    case Task::norm_equiv: return task_norm_equiv(c);
    case Task::extend: return task_extend(c);
    case Task::recover: return task_recover(c);
    case Task::energy: return task_energy(c);
    case Task::doubling: return task_doubling(c);
    case Task::picard: return task_picard(c);
    case Task::viscous: return task_viscous(c);
    case Task::viscosity_convergence: return task_viscosity_convergence(c);
    case Task::uc_probe: return task_uc_probe(c);
    case Task::kp_check: return task_kp_check(c);
  }
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  if (dynamic_cast<const CoefficientError*>(&e)) return "coefficient_error";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence_error";
  if (dynamic_cast<const SingularityError*>(&e)) return "singularity_error";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical_error";
  return "error";
}

}  // namespace

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const InvalidArgument*>(&error))
    return exit_config_error;
  return exit_numerical_error;
}

nlohmann::ordered_json version_info() {
  int major = 0, minor = 0, patch = 0;
  LAPACKE_ilaver(&major, &minor, &patch);
  return {{"fracspec", FRACSPEC_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"lapack", std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch)},
          {"compiler", __VERSION__},
          {"cxx_standard", static_cast<long>(__cplusplus)}};
}

RunResult run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.output_dir = config.resolve(config.output_dir);
  std::filesystem::create_directories(result.output_dir);

  Context ctx(config, result.output_dir);
  json error = nullptr;
  try {
    dispatch(ctx);
  } catch (const std::exception& e) {
    error = {{"type", error_type(e)}, {"message", e.what()}};
    if (const auto* conv = dynamic_cast<const ConvergenceError*>(&e)) error["history"] = conv->history();
    result.exit_code = exit_code_for(e);
  }
  result.invariants = ctx.invariants;
  const bool passed = std::all_of(ctx.invariants.begin(), ctx.invariants.end(),
                                  [](const Invariant& i) { return i.passed; });
  if (result.exit_code == exit_success && !passed) result.exit_code = exit_invariant_failure;

  json inv = json::array();
  for (const auto& i : ctx.invariants)
    inv.push_back({{"name", i.name}, {"value", number(i.value)}, {"relation", i.relation},
                   {"threshold", number(i.threshold)}, {"passed", i.passed}});
  std::vector<std::string> files = ctx.files;
  std::sort(files.begin(), files.end());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* status[] = {"success", "invariant_failure", "config_error", "numerical_error"};

  json& m = result.manifest;
  m["config"] = config.echo;
  m["versions"] = version_info();
  m["seed"] = config.seed;
  m["task"] = to_string(config.task);
  m["wall_time_seconds"] = wall;
  m["status"] = status[result.exit_code];
  m["exit_code"] = result.exit_code;
  m["invariants_passed"] = passed && error.is_null();
  m["invariants"] = inv;
  m["summary"] = ctx.summary;
  m["outputs"] = files;
  m["error"] = error;
  m["numerics"] =
      "CSV reals use %.17e; reruns on one platform are bit-identical, while libm and BLAS "
      "builds may change trailing digits across platforms";
  std::ofstream f(result.output_dir / "manifest.json", std::ios::binary);
  f << m.dump(2) << "\n";
  return result;
}

}  // namespace fracspec
