#include <afem/coefficients.hpp>

#include <afem/mesh_io.hpp>
#include <afem/point_locator.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace afem {

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  f.value = [c](const Vec3&) { return c; };
  f.gradient = [](const Vec3&) { return Vec3{0, 0, 0}; };
  f.description = std::to_string(c);
  f.is_constant = true;
  return f;
}

CoeffValue ScalarField::eval(const Vec3& x) const {
  CoeffValue out;
  out.v = value(x);
  if (gradient) {
    out.g = gradient(x);
  } else {
    constexpr double h = 1e-6;
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      out.g[a] = (value(xp) - value(xm)) / (2 * h);
    }
  }
  return out;
}

int CoefficientSet::set(const std::string& name, ScalarField field) {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) {
      fields_[i] = std::move(field);
      return i;
    }
  names_.push_back(name);
  fields_.push_back(std::move(field));
  return size() - 1;
}

bool CoefficientSet::has(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

int CoefficientSet::index(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  throw Error("unknown coefficient '" + name + "'");
}

void CoefficientSet::evaluate(const Vec3& x, std::span<CoeffValue> out) const {
  for (int i = 0; i < size(); ++i) out[i] = fields_[i].eval(x);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

std::vector<double> parse_args(const std::string& expr, const std::string& body, std::size_t min_n,
                               std::size_t max_n) {
  std::vector<double> args;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    if (!parse_number(item, v)) throw ConfigError("coefficient '" + expr + "': bad number '" + trim(item) + "'");
    args.push_back(v);
  }
  if (args.size() < min_n || args.size() > max_n)
    throw ConfigError("coefficient '" + expr + "': expected " + std::to_string(min_n) + ".." +
                      std::to_string(max_n) + " arguments, got " + std::to_string(args.size()));
  return args;
}

struct NodalData {
  Mesh mesh;
  std::vector<double> values;
  std::unique_ptr<PointLocator> locator;
};

ScalarField file_field(const std::string& expr, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("coefficient '" + expr + "': cannot open " + path);
  auto data = std::make_shared<NodalData>();
  // The mesh block ends where the `values` line begins.
  std::stringstream mesh_text, rest;
  std::string line;
  bool in_values = false;
  while (std::getline(is, line)) {
    if (!in_values && trim(line).rfind("values", 0) == 0) in_values = true;
    (in_values ? rest : mesh_text) << line << '\n';
  }
  try {
    data->mesh = read_mesh(mesh_text);
  } catch (const MeshError& e) {
    throw ConfigError("coefficient '" + expr + "': " + e.what());
  }
  std::string key;
  long n = 0;
  if (!(rest >> key >> n) || key != "values" || n != data->mesh.num_vertices())
    throw ConfigError("coefficient '" + expr + "': expected 'values " + std::to_string(data->mesh.num_vertices()) + "'");
  data->values.resize(n);
  for (long i = 0; i < n; ++i)
    if (!(rest >> data->values[i])) throw ConfigError("coefficient '" + expr + "': truncated values block");
  data->locator = std::make_unique<PointLocator>(data->mesh);
  ScalarField f;
  f.description = expr;
  f.value = [data](const Vec3& x) {
    const Location loc = data->locator->locate(x);
    if (!loc.found()) return 0.0;
    double v = 0.0;
    for (int i = 0; i <= data->mesh.dim(); ++i) v += loc.bary[i] * data->values[data->mesh.simplex(loc.simplex).verts[i]];
    return v;
  };
  return f;
}

}  // namespace

ScalarField parse_scalar_field(const std::string& raw, const std::string& base_dir) {
  const std::string expr = trim(raw);
  double c = 0;
  if (parse_number(expr, c)) return ScalarField::constant(c);
  const auto open = expr.find('(');
  if (open == std::string::npos || expr.back() != ')')
    throw ConfigError("coefficient '" + expr + "': expected a number or name(args)");
  const std::string name = trim(expr.substr(0, open));
  const std::string body = expr.substr(open + 1, expr.size() - open - 2);
  ScalarField f;
  f.description = expr;
  if (name == "gaussian") {
    const auto a = parse_args(expr, body, 4, 5);
    const double amp = a[0], sigma = a[1];
    if (!(sigma > 0)) throw ConfigError("coefficient '" + expr + "': sigma must be positive");
    const Vec3 x0{a[2], a[3], a.size() > 4 ? a[4] : 0.0};
    f.value = [=](const Vec3& x) {
      const Vec3 d = sub3(x, x0);
      return amp * std::exp(-dot3(d, d) / (2 * sigma * sigma));
    };
    f.gradient = [=](const Vec3& x) {
      const Vec3 d = sub3(x, x0);
      const double g = -amp * std::exp(-dot3(d, d) / (2 * sigma * sigma)) / (sigma * sigma);
      return Vec3{g * d[0], g * d[1], g * d[2]};
    };
  } else if (name == "poly") {
    auto a = parse_args(expr, body, 4, 7);
    a.resize(7, 0.0);
    f.value = [=](const Vec3& x) {
      return a[0] + a[1] * x[0] + a[2] * x[1] + a[3] * x[2] + a[4] * x[0] * x[0] + a[5] * x[1] * x[1] +
             a[6] * x[2] * x[2];
    };
    f.gradient = [=](const Vec3& x) {
      return Vec3{a[1] + 2 * a[4] * x[0], a[2] + 2 * a[5] * x[1], a[3] + 2 * a[6] * x[2]};
    };
  } else if (name == "trig") {
    auto a = parse_args(expr, body, 4, 5);
    a.resize(5, 0.0);
    f.value = [=](const Vec3& x) { return a[0] * std::sin(a[1] * x[0] + a[2] * x[1] + a[3] * x[2] + a[4]); };
    f.gradient = [=](const Vec3& x) {
      const double c = a[0] * std::cos(a[1] * x[0] + a[2] * x[1] + a[3] * x[2] + a[4]);
      return Vec3{c * a[1], c * a[2], c * a[3]};
    };
  } else if (name == "file") {
    std::filesystem::path p(trim(body));
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return file_field(expr, p.string());
  } else {
    throw ConfigError("coefficient '" + expr + "': unknown function '" + name +
                      "' (allowed: gaussian, poly, trig, file)");
  }
  return f;
}

}  // namespace afem
