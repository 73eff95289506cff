#include <afem/config.hpp>

#include <afem/mesh_generators.hpp>
#include <afem/mesh_io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace afem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Strips a trailing comment outside double quotes.
std::string strip_comment(const std::string& s) {
  bool q = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') q = !q;
    if (s[i] == '#' && !q) return s.substr(0, i);
  }
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& is, const std::string& origin) {
  ConfigFile cf;
  cf.origin_ = origin;
  std::string line, section;
  int lineno = 0, order = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    Entry e;
    e.line = lineno;
    e.order = order++;
    if (!val.empty() && val.front() == '"') {
      if (val.size() < 2 || val.back() != '"') throw ConfigError(where + ": unterminated string for '" + key + "'");
      e.raw = val.substr(1, val.size() - 2);
      e.quoted = true;
    } else {
      if (val.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
      e.raw = val;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (cf.values_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
    cf.values_[full] = e;
  }
  return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  ConfigFile cf = parse(is, path);
  cf.base_dir = std::filesystem::path(path).parent_path().string();
  if (cf.base_dir.empty()) cf.base_dir = ".";
  return cf;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_[key] = true;
  return &it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->raw : fallback;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v = 0;
  const char* b = e->raw.data();
  const auto [p, ec] = std::from_chars(b, b + e->raw.size(), v);
  if (e->quoted || ec != std::errc() || p != b + e->raw.size() || !std::isfinite(v))
    throw ConfigError(key + ": expected a number, got '" + e->raw + "'");
  return v;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  int v = 0;
  const char* b = e->raw.data();
  const auto [p, ec] = std::from_chars(b, b + e->raw.size(), v);
  if (e->quoted || ec != std::errc() || p != b + e->raw.size())
    throw ConfigError(key + ": expected an integer, got '" + e->raw + "'");
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (!e->quoted && e->raw == "true") return true;
  if (!e->quoted && e->raw == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + e->raw + "'");
}

std::vector<std::string> ConfigFile::section_keys(const std::string& section) const {
  std::vector<std::pair<int, std::string>> found;
  const std::string prefix = section + ".";
  for (const auto& [k, e] : values_)
    if (k.rfind(prefix, 0) == 0) found.emplace_back(e.order, k.substr(prefix.size()));
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

std::vector<std::string> ConfigFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : values_) out.push_back(k);
  return out;
}

std::vector<std::string> ConfigFile::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

namespace {

template <class T>
T pick(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, T>> options) {
  std::string names;
  for (const auto& [n, v] : options) {
    if (value == n) return v;
    names += names.empty() ? n : std::string(", ") + n;
  }
  throw ConfigError(key + ": unknown value '" + value + "' (expected one of " + names + ")");
}

}  // namespace

RunConfig parse_run_config(const ConfigFile& f) {
  RunConfig c;
  c.base_dir = f.base_dir;
  c.problem = f.get_string("problem.kind", c.problem);
  c.benchmark = f.get_string("problem.benchmark", c.benchmark);
  c.bratu_lambda = f.get_double("problem.bratu_lambda", c.bratu_lambda);
  c.constraint_data = f.get_string("problem.data", c.constraint_data);
  for (const auto& k : f.section_keys("coefficients"))
    c.coefficients.emplace_back(k, f.get_string("coefficients." + k, ""));

  auto& m = c.mesh;
  m.source = f.get_string("mesh.source", m.source);
  m.file = f.get_string("mesh.file", m.file);
  m.n = f.get_int("mesh.n", m.n);
  m.n_r = f.get_int("mesh.n_r", m.n_r);
  m.n_theta = f.get_int("mesh.n_theta", m.n_theta);
  m.r_in = f.get_double("mesh.r_in", m.r_in);
  m.r_out = f.get_double("mesh.r_out", m.r_out);
  m.radius = f.get_double("mesh.radius", m.radius);
  m.boundary = f.get_string("mesh.boundary", m.boundary);

  auto& a = c.adaptive;
  a.max_vertices = f.get_int("adapt.max_vertices", a.max_vertices);
  a.target_indicator = f.get_double("adapt.target_indicator", a.target_indicator);
  a.max_levels = f.get_int("adapt.max_levels", a.max_levels);
  a.indicator = pick<IndicatorKind>("adapt.indicator", f.get_string("adapt.indicator", "residual"),
                     {{"residual", IndicatorKind::residual}, {"dual", IndicatorKind::dual}});
  a.strategy = pick<MarkStrategy>("adapt.strategy", f.get_string("adapt.strategy", "hybrid"),
                    {{"equidistribution", MarkStrategy::equidistribution},
                     {"maximum", MarkStrategy::maximum},
                     {"hybrid", MarkStrategy::hybrid}});
  a.theta = f.get_double("adapt.theta", a.theta);
  a.p = f.get_double("adapt.p", a.p);
  a.uniform = f.get_bool("adapt.uniform", a.uniform);
  a.continue_on_newton_failure = f.get_bool("adapt.continue_on_newton_failure", a.continue_on_newton_failure);
  a.dual.enrichment = pick<DualEnrichment>("adapt.dual_enrichment", f.get_string("adapt.dual_enrichment", "refined"),
                           {{"refined", DualEnrichment::refined}, {"recovery", DualEnrichment::recovery}});
  c.psi = f.get_string("adapt.psi", c.psi);

  auto& n = a.newton;
  n.abs_tol = f.get_double("newton.abs_tol", n.abs_tol);
  n.rel_tol = f.get_double("newton.rel_tol", n.rel_tol);
  n.max_iters = f.get_int("newton.max_iters", n.max_iters);
  n.forcing = pick<ForcingRule>("newton.forcing", f.get_string("newton.forcing", "residual_scaled"),
                   {{"residual_scaled", ForcingRule::residual_scaled}, {"fixed", ForcingRule::fixed}});
  n.fixed_eta = f.get_double("newton.fixed_eta", n.fixed_eta);
  n.damping = f.get_bool("newton.damping", n.damping);
  n.max_halvings = f.get_int("newton.max_halvings", n.max_halvings);
  n.assembly.quad_degree = f.get_int("assembly.quad_degree", n.assembly.quad_degree);

  n.krylov = pick<KrylovMethod>("linear.method", f.get_string("linear.method", "auto"),
                  {{"auto", KrylovMethod::automatic}, {"cg", KrylovMethod::cg}, {"tfqmr", KrylovMethod::tfqmr}});
  auto& ml = n.multilevel;
  ml.pre_sweeps = f.get_int("linear.pre_sweeps", ml.pre_sweeps);
  ml.post_sweeps = f.get_int("linear.post_sweeps", ml.post_sweeps);
  ml.max_iters = f.get_int("linear.max_iters", ml.max_iters);
  ml.dense_limit = f.get_int("linear.dense_limit", ml.dense_limit);
  ml.hierarchical_basis = f.get_bool("linear.hierarchical_basis", ml.hierarchical_basis);
  a.dual.tol = f.get_double("linear.dual_tol", a.dual.tol);
  a.dual.multilevel = ml;
  a.dual.assembly = n.assembly;

  c.ppum.enabled = f.get_bool("ppum.enabled", c.ppum.enabled);
  c.ppum.parts = f.get_int("ppum.parts", c.ppum.parts);
  c.ppum.overlap_layers = f.get_int("ppum.overlap_layers", c.ppum.overlap_layers);
  c.ppum.local_budget = f.get_int("ppum.local_budget", c.ppum.local_budget);

  c.output_dir = f.get_string("output.dir", c.output_dir);
  c.write_vtk = f.get_bool("output.vtk", c.write_vtk);

  const auto extra = f.unused();
  if (!extra.empty()) throw ConfigError(extra.front() + ": unknown config key");
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(ConfigFile::load(path)); }

void validate(const RunConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
  static const std::set<std::string> problems = {"poisson", "bratu", "hamiltonian", "momentum", "coupled"};
  if (!problems.count(c.problem)) fail("problem.kind", "unknown problem '" + c.problem + "'");
  static const std::set<std::string> benches = {"square_sine", "cube_sine", "corner_singularity", "none"};
  if (c.problem == "poisson" && !benches.count(c.benchmark))
    fail("problem.benchmark", "unknown benchmark '" + c.benchmark + "'");
  if (!std::isfinite(c.bratu_lambda)) fail("problem.bratu_lambda", "must be finite");
  if (c.constraint_data != "flat" && c.constraint_data != "two_holes")
    fail("problem.data", "expected flat or two_holes");

  static const std::set<std::string> sources = {"unit_square", "unit_cube", "l_shape", "annulus", "sphere_in_box",
                                                "file"};
  const auto& m = c.mesh;
  if (!sources.count(m.source)) fail("mesh.source", "unknown mesh source '" + m.source + "'");
  if (m.source == "file" && m.file.empty()) fail("mesh.file", "required when mesh.source = \"file\"");
  if (m.n < 1) fail("mesh.n", "must be at least 1");
  if (m.n_r < 1) fail("mesh.n_r", "must be at least 1");
  if (m.n_theta < 3) fail("mesh.n_theta", "must be at least 3");
  if (!(m.r_in > 0)) fail("mesh.r_in", "must be positive");
  if (!(m.r_out > m.r_in)) fail("mesh.r_out", "must exceed mesh.r_in");
  if (!(m.radius > 0 && m.radius < 1)) fail("mesh.radius", "must lie in (0, 1)");
  if (m.boundary != "dirichlet" && m.boundary != "inner_neumann")
    fail("mesh.boundary", "expected dirichlet or inner_neumann");

  const auto& a = c.adaptive;
  if (a.max_vertices < 1) fail("adapt.max_vertices", "must be positive");
  if (a.target_indicator < 0) fail("adapt.target_indicator", "must be nonnegative");
  if (a.max_levels < 1) fail("adapt.max_levels", "must be at least 1");
  if (!(a.theta > 0 && a.theta <= 1)) fail("adapt.theta", "must lie in (0, 1]");
  if (!(a.p >= 1)) fail("adapt.p", "must be at least 1");

  const auto& n = a.newton;
  if (!(n.abs_tol > 0)) fail("newton.abs_tol", "must be positive");
  if (!(n.rel_tol > 0)) fail("newton.rel_tol", "must be positive");
  if (n.max_iters < 1) fail("newton.max_iters", "must be at least 1");
  if (!(n.fixed_eta > 0 && n.fixed_eta < 1)) fail("newton.fixed_eta", "must lie in (0, 1)");
  if (n.max_halvings < 0) fail("newton.max_halvings", "must be nonnegative");
  if (n.assembly.quad_degree != 1 && n.assembly.quad_degree != 2 && n.assembly.quad_degree != 5)
    fail("assembly.quad_degree", "supported degrees are 1, 2 and 5");
  const auto& ml = n.multilevel;
  if (ml.pre_sweeps < 0) fail("linear.pre_sweeps", "must be nonnegative");
  if (ml.post_sweeps < 0) fail("linear.post_sweeps", "must be nonnegative");
  if (ml.pre_sweeps + ml.post_sweeps < 1) fail("linear.pre_sweeps", "at least one smoothing sweep required");
  if (ml.max_iters < 1) fail("linear.max_iters", "must be at least 1");
  if (ml.dense_limit < 1) fail("linear.dense_limit", "must be at least 1");
  if (!(a.dual.tol > 0)) fail("linear.dual_tol", "must be positive");

  if (c.ppum.parts < 1) fail("ppum.parts", "must be at least 1");
  if (c.ppum.overlap_layers < 1) fail("ppum.overlap_layers", "must be at least 1");
  if (c.ppum.local_budget < 1) fail("ppum.local_budget", "must be positive");
  if (c.output_dir.empty()) fail("output.dir", "must not be empty");
}

Mesh build_configured_mesh(const MeshSpec& m, const std::string& base_dir) {
  BoundaryClassifier cls = all_dirichlet();
  if (m.boundary == "inner_neumann") {
    if (m.source == "annulus") {
      const double mid = 0.5 * (m.r_in + m.r_out);
      cls = [mid](const Vec3& x) {
        return std::hypot(x[0], x[1]) < mid ? BoundaryClass::neumann : BoundaryClass::dirichlet;
      };
    } else if (m.source == "sphere_in_box") {
      cls = [](const Vec3& x) {
        const double inf = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
        return inf < 1.0 - 1e-9 ? BoundaryClass::neumann : BoundaryClass::dirichlet;
      };
    } else {
      throw ConfigError("mesh.boundary: inner_neumann needs an annulus or sphere_in_box mesh");
    }
  }
  if (m.source == "unit_square") return unit_square(m.n, cls);
  if (m.source == "unit_cube") return unit_cube(m.n, cls);
  if (m.source == "l_shape") return l_shape(m.n, cls);
  if (m.source == "annulus") return annulus(m.n_r, m.n_theta, m.r_in, m.r_out, cls);
  if (m.source == "sphere_in_box") return sphere_in_box(m.n, m.radius, cls);
  std::filesystem::path p(m.file);
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return read_mesh_file(p.string());
}

}  // namespace afem
