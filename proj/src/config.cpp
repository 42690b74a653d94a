#include "fracspec/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fracspec/error.hpp"
#include "fracspec/nonlinearity.hpp"

namespace fracspec {

namespace {

using json = nlohmann::ordered_json;

enum class Kind { real, integer, boolean, text, choice, real_list, int_list, real_or_list, box, map, map_list };

struct Field {
  std::string name;
  Kind kind;
  bool required = false;
  json fallback;  // null: "automatic", and null input is accepted
  std::string doc;
  std::vector<std::string> choices{};
  std::vector<Field> children{};
  double lower = -std::numeric_limits<double>::infinity();
  bool strict = false;  // lower bound excluded
};

Field real(std::string name, json fallback, std::string doc, double lower = -HUGE_VAL,
           bool strict = false) {
  return {std::move(name), Kind::real, false, std::move(fallback), std::move(doc), {}, {}, lower, strict};
}
Field integer(std::string name, json fallback, std::string doc, double lower = -HUGE_VAL) {
  return {std::move(name), Kind::integer, false, std::move(fallback), std::move(doc), {}, {}, lower, false};
}
Field boolean(std::string name, bool fallback, std::string doc) {
  return {std::move(name), Kind::boolean, false, fallback, std::move(doc)};
}
Field text(std::string name, std::string fallback, std::string doc) {
  return {std::move(name), Kind::text, false, std::move(fallback), std::move(doc)};
}
Field choice(std::string name, json fallback, std::vector<std::string> choices, std::string doc) {
  return {std::move(name), Kind::choice, false, std::move(fallback), std::move(doc), std::move(choices)};
}
Field real_list(std::string name, json fallback, std::string doc, double lower = -HUGE_VAL,
                bool strict = false) {
  return {std::move(name), Kind::real_list, false, std::move(fallback), std::move(doc), {}, {}, lower, strict};
}
Field int_list(std::string name, json fallback, std::string doc) {
  return {std::move(name), Kind::int_list, false, std::move(fallback), std::move(doc), {}, {}, 0.0, false};
}
Field box(std::string name, json fallback, std::string doc) {
  return {std::move(name), Kind::box, false, std::move(fallback), std::move(doc)};
}
Field map(std::string name, std::vector<Field> children, std::string doc) {
  return {std::move(name), Kind::map, false, nullptr, std::move(doc), {}, std::move(children)};
}
Field map_list(std::string name, json fallback, std::vector<Field> element, std::string doc) {
  return {std::move(name), Kind::map_list, false, std::move(fallback), std::move(doc), {}, std::move(element)};
}
Field required(Field f) {
  f.required = true;
  return f;
}

int line_of(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? m.line + 1 : -1;
}

[[noreturn]] void fail(const std::string& message, const std::string& key, int line) {
  throw ConfigError(line > 0 ? message + " (line " + std::to_string(line) + ")" : message, key, line);
}

std::string join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void check_bound(double v, const Field& f, const std::string& key, int line) {
  if (f.strict ? !(v > f.lower) : !(v >= f.lower))
    fail(key + " must be " + (f.strict ? "> " : ">= ") + number(f.lower), key, line);
}

double scalar_real(const YAML::Node& n, const Field& f, const std::string& key) {
  if (!n.IsScalar()) fail("type mismatch: " + key + " expects a real number", key, line_of(n));
  double v = 0.0;
  try {
    v = n.as<double>();
  } catch (const YAML::Exception&) {
    fail("type mismatch: " + key + " expects a real number, got '" + n.Scalar() + "'", key, line_of(n));
  }
  if (!std::isfinite(v)) fail(key + " must be finite", key, line_of(n));
  check_bound(v, f, key, line_of(n));
  return v;
}

long long scalar_int(const YAML::Node& n, const Field& f, const std::string& key) {
  if (!n.IsScalar()) fail("type mismatch: " + key + " expects an integer", key, line_of(n));
  long long v = 0;
  try {
    v = n.as<long long>();
  } catch (const YAML::Exception&) {
    fail("type mismatch: " + key + " expects an integer, got '" + n.Scalar() + "'", key, line_of(n));
  }
  check_bound(static_cast<double>(v), f, key, line_of(n));
  return v;
}

json convert_map(const YAML::Node& node, const std::vector<Field>& fields, const std::string& prefix);

json convert_value(const YAML::Node& node, const Field& f, const std::string& key) {
  if (node.IsNull()) {
    if (f.fallback.is_null() && !f.required && f.kind != Kind::map) return nullptr;
    fail(key + " must not be empty", key, line_of(node));
  }
  switch (f.kind) {
    case Kind::real:
      return scalar_real(node, f, key);
    case Kind::integer:
      return scalar_int(node, f, key);
    case Kind::boolean:
      if (node.IsScalar()) {
        try {
          return node.as<bool>();
        } catch (const YAML::Exception&) {
        }
      }
      fail("type mismatch: " + key + " expects true or false", key, line_of(node));
    case Kind::text:
      if (!node.IsScalar()) fail("type mismatch: " + key + " expects a string", key, line_of(node));
      return node.Scalar();
    case Kind::choice: {
      if (!node.IsScalar()) fail("type mismatch: " + key + " expects a string", key, line_of(node));
      const auto v = node.Scalar();
      for (const auto& c : f.choices)
        if (c == v) return v;
      std::string all;
      for (const auto& c : f.choices) all += (all.empty() ? "" : ", ") + c;
      fail(key + " must be one of " + all + ", got '" + v + "'", key, line_of(node));
    }
    case Kind::real_list:
    case Kind::int_list: {
      if (!node.IsSequence()) fail("type mismatch: " + key + " expects a list", key, line_of(node));
      json out = json::array();
      for (std::size_t i = 0; i < node.size(); ++i) {
        const auto item = key + "[" + std::to_string(i) + "]";
        if (f.kind == Kind::real_list)
          out.push_back(scalar_real(node[i], f, item));
        else
          out.push_back(scalar_int(node[i], f, item));
      }
      return out;
    }
    case Kind::real_or_list:
      if (node.IsSequence()) {
        if (node.size() == 0) fail(key + " must not be an empty list", key, line_of(node));
        json out = json::array();
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(scalar_real(node[i], f, key));
        return out;
      }
      return scalar_real(node, f, key);
    case Kind::box: {
      if (!node.IsSequence() || node.size() == 0)
        fail("type mismatch: " + key + " expects [lo, hi] or [[lo, hi], [lo, hi]]", key, line_of(node));
      Field any = real("", nullptr, "");
      auto pair = [&](const YAML::Node& p) {
        if (!p.IsSequence() || p.size() != 2)
          fail("type mismatch: " + key + " intervals must be [lo, hi]", key, line_of(p));
        json out = json::array({scalar_real(p[0], any, key), scalar_real(p[1], any, key)});
        if (!(out[0].get<double>() < out[1].get<double>()))
          fail(key + " intervals need lo < hi", key, line_of(p));
        return out;
      };
      json out = json::array();
      if (node[0].IsScalar()) {
        out.push_back(pair(node));
      } else {
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(pair(node[i]));
      }
      return out;
    }
    case Kind::map:
      return convert_map(node, f.children, key);
    case Kind::map_list: {
      if (!node.IsSequence()) fail("type mismatch: " + key + " expects a list", key, line_of(node));
      json out = json::array();
      for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(convert_map(node[i], f.children, key + "[" + std::to_string(i) + "]"));
      return out;
    }
  }
  fail("unsupported field kind for " + key, key, line_of(node));
}

json convert_map(const YAML::Node& node, const std::vector<Field>& fields, const std::string& prefix) {
  if (!node.IsMap())
    fail("type mismatch: " + (prefix.empty() ? std::string("the document") : prefix) +
             " must be a mapping",
         prefix, line_of(node));
  for (auto it = node.begin(); it != node.end(); ++it) {
    const auto name = it->first.Scalar();
    bool known = false;
    for (const auto& f : fields) known = known || f.name == name;
    if (!known) fail("unknown key '" + join(prefix, name) + "'", join(prefix, name), line_of(it->first));
  }
  json out = json::object();
  for (const auto& f : fields) {
    const auto key = join(prefix, f.name);
    const YAML::Node child = node[f.name];
    if (child.IsDefined()) {
      out[f.name] = convert_value(child, f, key);
    } else if (f.required) {
      fail("missing key '" + key + "'", key, line_of(node));
    } else if (f.kind == Kind::map) {
      out[f.name] = convert_map(YAML::Node(YAML::NodeType::Map), f.children, key);
    } else {
      out[f.name] = f.fallback;
    }
  }
  return out;
}

// ---------------------------------------------------------------- schemas

const std::vector<std::string> kTaskNames{
    "spectrum", "funcalc", "norm_equiv", "extend", "recover", "energy", "doubling",
    "picard", "viscous", "viscosity_convergence", "uc_probe", "kp_check"};

Field initial_field(const std::string& profile, double amplitude, double width) {
  return map("initial",
             {choice("profile", profile, {"gaussian", "bump", "mode", "random"},
                     "gaussian: A exp(-|x-c|^2/w^2) e^{i k x_1}; bump: A (1-|x-c|^2/w^2)^4; "
                     "mode: A times eigenvector `mode`; random: seeded smooth sum of bumps"),
              real("amplitude", amplitude, "amplitude A"),
              real_list("center", json::array(), "centre c (empty: origin)"),
              real("width", width, "width w", 0.0, true),
              real("wavenumber", 0.0, "k for the complex gaussian"),
              integer("mode", 0, "eigenvector index for profile mode", 0)},
             "initial or base state");
}

std::vector<Field> ladder_fields() {
  return {real("y0", nullptr, "smallest height (default h/32)", 0.0, true),
          real("ratio", std::pow(2.0, 0.25), "geometric ratio of the ladder", 1.0, true),
          real("y_max", nullptr, "largest height (default 4X)", 0.0, true),
          integer("quadrature_nodes", 400, "t-quadrature nodes", 3),
          real("t_min_factor", 1e-8, "t_min = factor / lambda_max", 0.0, true),
          real("t_max_factor", 1e4, "t_max = factor / smallest positive eigenvalue", 0.0, true)};
}

Field nonlinearity_field(bool gradient, int dim) {
  json powers = json::array({2, 1});
  if (gradient) {
    powers = json::array({1, 1, 1});
    for (int k = 1; k < 2 * dim; ++k) powers.push_back(0);
  }
  json terms = json::array({json{{"coeff_re", 1.0}, {"coeff_im", 0.0}, {"powers", powers}}});
  return map("nonlinearity",
             {choice("kind", gradient ? "gradient_Q" : "polynomial_P", {"polynomial_P", "gradient_Q"},
                     "P(z, zbar) or Q(z, zbar, grad z, grad zbar)"),
              integer("n1", 3, "lowest total degree N1", 2),
              integer("n2", 3, "highest total degree N2", 2),
              map_list("terms", terms,
                       {real("coeff_re", 1.0, "real part of the coefficient"),
                        real("coeff_im", 0.0, "imaginary part of the coefficient"),
                        required(int_list("powers", nullptr,
                                          "[p_z, p_zbar] or [p_z, p_zbar, p_dz..., p_dzbar...]"))},
                       "monomials")},
             gradient ? "gradient nonlinearity Q; default |u|^2 d_x u"
                      : "polynomial nonlinearity P; default |u|^2 u");
}

std::vector<Field> task_fields(Task task, int dim) {
  std::vector<Field> f;
  auto add_ladder = [&] {
    for (auto& l : ladder_fields()) f.push_back(l);
  };
  switch (task) {
    case Task::spectrum:
      f = {integer("count", 0, "eigenvalues written (0: all)", 0),
           boolean("verify", true, "run orthonormality/reconstruction checks")};
      break;
    case Task::funcalc:
      f = {integer("samples", 100, "random test vectors", 1),
           real_list("times", json::array({0.1, 1.0}), "t and s for the group law"),
           real_list("epsilons", json::array({0.01, 0.1}), "viscosities for the smoothing bound", 0.0, true),
           real_list("smoothing_times", json::array({0.1, 1.0}), "times for the smoothing bound", 0.0, true)};
      break;
    case Task::norm_equiv:
      f = {integer("bumps", 16, "random Gaussian test functions", 0),
           integer("eigen_modes", 8, "lowest eigenvectors added to the test set", 0)};
      break;
    case Task::extend:
    case Task::recover:
    case Task::energy:
      f = {initial_field("gaussian", 1.0, 1.0)};
      add_ladder();
      if (task == Task::recover) f.push_back(real("tolerance", 1e-3, "relative error target", 0.0, true));
      if (task == Task::energy) f.push_back(integer("samples", 20, "random states for the ratio bracket", 1));
      break;
    case Task::doubling:
      f = {initial_field("bump", 1.0, 1.0),
           real_list("radii", json::array({0.5, 0.25, 0.125}), "radii R", 0.0, true),
           real_list("center", json::array(), "ball centre on {y = 0} (empty: origin)"),
           boolean("synthetic", true, "also measure the constant synthetic field")};
      add_ladder();
      break;
    case Task::picard:
      f = {initial_field("gaussian", 0.03, 1.0), nonlinearity_field(false, dim),
           real("T", 0.1, "final time", 0.0, true), real("dt", 1e-3, "time step", 0.0, true),
           real("tol", 1e-10, "fixed-point tolerance in H^s", 0.0, true),
           integer("max_iter", 100, "maximum Picard sweeps", 1),
           real("s", nullptr, "monitoring Sobolev index (default 2 in 1D, 4 in 2D)", 0.0),
           real("c_est", nullptr, "scheme constant (default: measured)", 0.0, true),
           integer("output_stride", 1, "keep every k-th time node", 1)};
      break;
    case Task::viscous:
    case Task::viscosity_convergence:
      f = {initial_field("gaussian", 0.1, 2.0), nonlinearity_field(true, dim)};
      if (task == Task::viscous)
        f.push_back(real("epsilon", 0.01, "viscosity", 0.0));
      else
        f.push_back(real_list("epsilons", json::array({0.1, 0.05, 0.025, 0.0125}),
                              "nonincreasing viscosities", 0.0, true));
      for (auto& x : {real("T", 0.1, "final time", 0.0, true), real("dt", 1e-3, "time step", 0.0, true),
                      real("s", nullptr, "monitoring Sobolev index (default 2 in 1D, 4 in 2D)", 0.0),
                      real("c_est", nullptr, "scheme constant (default: measured)", 0.0, true),
                      real("envelope_factor", 10.0, "blow-up factor over 8c||u0||", 0.0, true),
                      integer("output_stride", 1, "keep every k-th time node", 1)})
        f.push_back(x);
      break;
    case Task::uc_probe:
      f = {box("theta", json::array({json::array({-1.0, 0.0})}), "open set Theta"),
           box("support", json::array({json::array({1.0, 2.0})}), "support of the bump f"),
           boolean("boundary_check", true, "rerun on a box of twice the size and report the change")};
      break;
    case Task::kp_check:
      f = {real("l", 2.0, "order of the Bessel potential", 0.0, true),
           integer("pairs", 100, "random smooth pairs", 1)};
      break;
  }
  return f;
}

std::vector<Field> top_fields(Task task, int dim) {
  return {
      required(map("grid",
                   {required(integer("dim", nullptr, "1 or 2", 1)),
                    required(integer("n", nullptr, "points per axis", 3)),
                    required(real("half_length", nullptr, "X, the box is [-X, X]^dim", 0.0, true)),
                    required(choice("boundary", nullptr, {"dirichlet", "periodic"}, "boundary condition"))},
                   "uniform grid")),
      required(map("coefficients",
                   {required(choice("kind", nullptr, {"identity", "radial_bump", "tabulated"}, "family")),
                    map("params",
                        {real("scale", 0.0, "bump amplitude of a"),
                         real("width", 1.0, "bump width of a", 0.0, true),
                         real_list("shape", json::array(), "row-major dim x dim shape (empty: identity)"),
                         real("c_amplitude", 0.0, "bump amplitude of c"),
                         real("c_width", 1.0, "bump width of c", 0.0, true),
                         real("c_offset", 0.0, "constant part of c")},
                        "radial_bump parameters"),
                    text("table_path", "", "CSV table for kind tabulated")},
                   "coefficient field")),
      required(Field{"alpha", Kind::real_or_list, false, nullptr, "fractional order or list of orders",
                     {}, {}, 0.0, false}),
      required(choice("task", nullptr, kTaskNames, "experiment to run")),
      map("task_params", task_fields(task, dim), "task-specific parameters"),
      text("output_dir", "out", "directory for CSV/JSON outputs (relative to the config file)"),
      integer("seed", 1, "seed for random test functions", 0),
  };
}

// ---------------------------------------------------------------- echo

void emit(YAML::Emitter& out, const json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (auto it = j.begin(); it != j.end(); ++it) {
      out << YAML::Key << it.key() << YAML::Value;
      emit(out, it.value());
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
    if (flat) out << YAML::Flow;
    out << YAML::BeginSeq;
    for (const auto& e : j) emit(out, e);
    out << YAML::EndSeq;
  } else if (j.is_null()) {
    out << YAML::Null;
  } else if (j.is_boolean()) {
    out << j.get<bool>();
  } else if (j.is_number_integer()) {
    out << j.get<long long>();
  } else if (j.is_number()) {
    out << j.get<double>();
  } else {
    out << YAML::DoubleQuoted << j.get<std::string>();
  }
}

void describe(std::ostringstream& out, const std::vector<Field>& fields, const std::string& indent) {
  for (const auto& f : fields) {
    out << indent << f.name;
    if (f.kind == Kind::map) {
      out << ":  " << f.doc << "\n";
      describe(out, f.children, indent + "  ");
      continue;
    }
    out << ": " << f.doc;
    if (f.required)
      out << " [required]";
    else if (f.fallback.is_null())
      out << " [default: auto]";
    else
      out << " [default: " << f.fallback.dump() << "]";
    if (!f.choices.empty()) {
      out << " {";
      for (std::size_t i = 0; i < f.choices.size(); ++i) out << (i ? "|" : "") << f.choices[i];
      out << "}";
    }
    out << "\n";
    if (f.kind == Kind::map_list) describe(out, f.children, indent + "  - ");
  }
}

// ---------------------------------------------------------------- semantic checks

void require_alpha_range(const RunConfig& c, bool closed_top) {
  for (double a : c.alphas)
    if (!(a > 0.0 && (closed_top ? a <= 1.0 : a < 1.0)))
      throw ConfigError(std::string("alpha must lie in (0,1") + (closed_top ? "]" : ")") + " for task " +
                            to_string(c.task),
                        "alpha");
}

void check_point(const json& p, int dim, const std::string& key) {
  if (!p.empty() && static_cast<int>(p.size()) != dim)
    throw ConfigError(key + " needs " + std::to_string(dim) + " coordinates", key);
}

void semantic_checks(RunConfig& c) {
  if (c.dim != 1 && c.dim != 2) throw ConfigError("grid.dim must be 1 or 2", "grid.dim");
  if (c.coefficient_kind == CoefficientKind::tabulated && c.table_path.empty())
    throw ConfigError("coefficients.table_path is required for kind tabulated", "coefficients.table_path");
  if (!c.coefficient_params.shape.empty() &&
      c.coefficient_params.shape.size() != static_cast<std::size_t>(c.dim * c.dim))
    throw ConfigError("coefficients.params.shape needs dim*dim entries", "coefficients.params.shape");

  auto& p = c.task_params;
  switch (c.task) {
    case Task::extend:
    case Task::recover:
    case Task::energy:
    case Task::doubling:
      require_alpha_range(c, false);
      break;
    case Task::uc_probe:
      require_alpha_range(c, true);
      for (const char* name : {"theta", "support"}) {
        auto& b = p[name];
        if (b.size() == 1 && c.dim == 2) b.push_back(b[0]);
        if (static_cast<int>(b.size()) != c.dim)
          throw ConfigError(std::string("task_params.") + name + " needs one interval per axis",
                            std::string("task_params.") + name);
      }
      break;
    case Task::viscosity_convergence: {
      const auto& e = p["epsilons"];
      if (e.size() < 2)
        throw ConfigError("task_params.epsilons needs at least 2 entries", "task_params.epsilons");
      for (std::size_t k = 1; k < e.size(); ++k)
        if (e[k].get<double>() > e[k - 1].get<double>())
          throw ConfigError("task_params.epsilons must be nonincreasing", "task_params.epsilons");
      break;
    }
    default:
      break;
  }
  if (p.contains("initial")) check_point(p["initial"]["center"], c.dim, "task_params.initial.center");
  if (p.contains("center")) check_point(p["center"], c.dim, "task_params.center");
  if (p.contains("nonlinearity")) {
    const auto& nl = p["nonlinearity"];
    std::vector<Monomial> terms;
    for (const auto& t : nl["terms"])
      terms.push_back({{t["coeff_re"].get<double>(), t["coeff_im"].get<double>()},
                       t["powers"].get<std::vector<int>>()});
    try {
      Nonlinearity(parse_nonlinearity_kind(nl["kind"].get<std::string>()), terms, nl["n1"].get<int>(),
                   nl["n2"].get<int>(), c.dim);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("task_params.nonlinearity: ") + e.what(), "task_params.nonlinearity");
    }
    if (c.task == Task::picard && nl["kind"] != "polynomial_P")
      throw ConfigError("task picard needs a polynomial_P nonlinearity", "task_params.nonlinearity.kind");
  }
}

RunConfig from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.echo = j;
  c.base_dir = base_dir;
  const auto& g = j["grid"];
  c.dim = g["dim"].get<int>();
  c.n = g["n"].get<int>();
  c.half_length = g["half_length"].get<double>();
  c.boundary = parse_boundary(g["boundary"].get<std::string>());
  const auto& co = j["coefficients"];
  c.coefficient_kind = parse_coefficient_kind(co["kind"].get<std::string>());
  const auto& pa = co["params"];
  c.coefficient_params.scale = pa["scale"].get<double>();
  c.coefficient_params.width = pa["width"].get<double>();
  c.coefficient_params.shape = pa["shape"].get<std::vector<double>>();
  c.coefficient_params.c_amplitude = pa["c_amplitude"].get<double>();
  c.coefficient_params.c_width = pa["c_width"].get<double>();
  c.coefficient_params.c_offset = pa["c_offset"].get<double>();
  c.table_path = co["table_path"].get<std::string>();
  if (j["alpha"].is_array())
    c.alphas = j["alpha"].get<std::vector<double>>();
  else
    c.alphas = {j["alpha"].get<double>()};
  c.task = parse_task(j["task"].get<std::string>());
  c.task_params = j["task_params"];
  c.output_dir = j["output_dir"].get<std::string>();
  c.seed = j["seed"].get<std::uint64_t>();
  semantic_checks(c);
  c.echo["task_params"] = c.task_params;
  return c;
}

}  // namespace

std::string to_string(Task task) { return kTaskNames[static_cast<std::size_t>(task)]; }

Task parse_task(const std::string& name) {
  for (std::size_t k = 0; k < kTaskNames.size(); ++k)
    if (kTaskNames[k] == name) return static_cast<Task>(k);
  throw InvalidArgument("unknown task '" + name + "'");
}

const std::vector<Task>& all_tasks() {
  static const std::vector<Task> tasks = [] {
    std::vector<Task> t;
    for (std::size_t k = 0; k < kTaskNames.size(); ++k) t.push_back(static_cast<Task>(k));
    return t;
  }();
  return tasks;
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.msg + " (line " +
                          std::to_string(e.mark.line + 1) + ")",
                      "", e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("the configuration must be a mapping", "", 1);

  // Grid dimension and task select the task_params schema.
  Task task = Task::spectrum;
  int dim = 1;
  if (const auto t = root["task"]; t.IsDefined()) {
    const Field f = choice("task", nullptr, kTaskNames, "");
    task = parse_task(convert_value(t, f, "task").get<std::string>());
  }
  if (const auto g = root["grid"]; g.IsMap() && g["dim"].IsDefined()) {
    const Field f = integer("dim", nullptr, "", 1);
    dim = static_cast<int>(convert_value(g["dim"], f, "grid.dim").get<long long>());
    if (dim != 1 && dim != 2) fail("grid.dim must be 1 or 2", "grid.dim", line_of(g["dim"]));
  }
  const json j = convert_map(root, top_fields(task, dim), "");
  return from_json(j, base_dir);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path.string(), "");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  return parse_config_text(buf.str(), dir);
}

std::string echo_yaml(const RunConfig& config) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  emit(out, config.echo);
  return std::string(out.c_str()) + "\n";
}

std::string config_reference() {
  std::ostringstream out;
  out << "Configuration keys (YAML):\n";
  describe(out, top_fields(Task::spectrum, 1), "  ");
  for (Task t : all_tasks()) {
    out << "task_params for task " << to_string(t) << ":\n";
    describe(out, task_fields(t, 1), "  ");
  }
  return out.str();
}

}  // namespace fracspec
