#include <afem/constraints.hpp>

#include <cmath>
#include <numbers>

namespace afem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kAxis = "xyz";

std::string sym_name(const std::string& base, int a, int b) {
  if (a > b) std::swap(a, b);
  return base + "_" + kAxis[a] + kAxis[b];
}

std::string vec_name(const std::string& base, int a) { return base + "_" + kAxis[a]; }

std::string mixed_name(const std::string& base, int a, int b) { return base + "_" + kAxis[a] + kAxis[b]; }

/// Coefficient indices resolved once per problem.
struct Layout {
  int Rhat, trK, rho, robin_c, robin_z, dirichlet_f, phi, source_phi;
  int Ahat[3][3], robin_C[3][3], metric[3][3];
  int jhat[3], robin_Z[3], dirichlet_F[3], source_W[3];

  explicit Layout(const CoefficientSet& s) {
    Rhat = s.index("Rhat");
    trK = s.index("trK");
    rho = s.index("rho");
    robin_c = s.index("robin_c");
    robin_z = s.index("robin_z");
    dirichlet_f = s.index("dirichlet_f");
    phi = s.index("phi");
    source_phi = s.index("source_phi");
    for (int a = 0; a < 3; ++a) {
      jhat[a] = s.index(vec_name("jhat", a));
      robin_Z[a] = s.index(vec_name("robin_Z", a));
      dirichlet_F[a] = s.index(vec_name("dirichlet_F", a));
      source_W[a] = s.index(vec_name("source_W", a));
      for (int b = 0; b < 3; ++b) {
        Ahat[a][b] = s.index(sym_name("Ahat", a, b));
        metric[a][b] = s.index(sym_name("metric", a, b));
        robin_C[a][b] = s.index(mixed_name("robin_C", a, b));
      }
    }
  }
};

void invert_metric(int d, ConstraintPoint& c) {
  double det;
  if (d == 2) {
    det = c.g[0][0] * c.g[1][1] - c.g[0][1] * c.g[1][0];
    c.ginv[0][0] = c.g[1][1] / det;
    c.ginv[1][1] = c.g[0][0] / det;
    c.ginv[0][1] = c.ginv[1][0] = -c.g[0][1] / det;
  } else {
    const auto& g = c.g;
    det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
          g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
        c.ginv[i][j] = (g[i1][j1] * g[i2][j2] - g[i1][j2] * g[i2][j1]) / det;
      }
  }
  c.sqrt_det = std::sqrt(det);
}

ConstraintPoint load(int d, const Layout& L, std::span<const CoeffValue> k) {
  ConstraintPoint c;
  c.Rhat = k[L.Rhat].v;
  c.trK = k[L.trK].v;
  c.dtrK = k[L.trK].g;
  c.rho = k[L.rho].v;
  c.robin_c = k[L.robin_c].v;
  c.robin_z = k[L.robin_z].v;
  c.phi = k[L.phi].v;
  c.source_phi = k[L.source_phi].v;
  for (int a = 0; a < d; ++a) {
    c.jhat[a] = k[L.jhat[a]].v;
    c.robin_Z[a] = k[L.robin_Z[a]].v;
    c.source_W[a] = k[L.source_W[a]].v;
    for (int b = 0; b < d; ++b) {
      c.Ahat[a][b] = k[L.Ahat[a][b]].v;
      c.robin_C[a][b] = k[L.robin_C[a][b]].v;
      c.g[a][b] = k[L.metric[a][b]].v;
    }
  }
  invert_metric(d, c);
  return c;
}

double contract_grad(int d, const double ginv[3][3], const Vec3& p, const Vec3& q) {
  double s = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s += ginv[a][b] * p[a] * q[b];
  return s;
}

/// T_low = g T g for a tensor with both indices up.
void lower(int d, const double g[3][3], const double up[3][3], double low[3][3]) {
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) s += g[a][c] * up[c][e] * g[e][b];
      low[a][b] = s;
    }
}

void raise(int d, const double ginv[3][3], const double low[3][3], double up[3][3]) { lower(d, ginv, low, up); }

double contract(int d, const double a[3][3], const double b[3][3]) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += a[i][j] * b[i][j];
  return s;
}

/// Gradients of the W block starting at component `off`.
std::array<Vec3, kMaxComponents> w_grad(const FieldValue& f, int off, int d) {
  std::array<Vec3, kMaxComponents> out{};
  for (int a = 0; a < d; ++a) out[a] = f.grad[off + a];
  return out;
}

/// (E V)_{ab} = (d_b V_a + d_a V_b) / 2 with V_a = g_ac V^c.
void deformation_low(int d, const double g[3][3], const std::array<Vec3, kMaxComponents>& dV, double E[3][3]) {
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0;
      for (int c = 0; c < d; ++c) s += g[a][c] * dV[c][b] + g[b][c] * dV[c][a];
      E[a][b] = 0.5 * s;
    }
}

double lower_dot(int d, const double g[3][3], const double* up, const FieldValue& v, int off) {
  double s = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s += up[a] * g[a][b] * v.val[off + b];
  return s;
}

enum class Mode { hamiltonian, momentum, coupled };

/// Shared integrand state for the three constraint problems.
class ConstraintForms {
 public:
  ConstraintForms(int dim, Mode mode, const CoefficientSet& coeffs) : d_(dim), mode_(mode), layout_(coeffs) {
    if (dim != 2 && dim != 3) throw ConfigError("constraint problems need dim 2 or 3");
    has_phi_ = mode != Mode::momentum;
    w_off_ = mode == Mode::hamiltonian ? -1 : (mode == Mode::coupled ? 1 : 0);
  }

  int components() const { return (has_phi_ ? 1 : 0) + (w_off_ >= 0 ? d_ : 0); }

  double residual(int t, const PointContext& ctx, const FieldValue& u, const FieldValue& v) const {
    const ConstraintPoint c = load(d_, layout_, ctx.coeff);
    const State s = state(c, u, ctx);
    if (t == 0) {
      double r = 0;
      if (has_phi_) {
        r += contract_grad(d_, c.ginv, u.grad[0], v.grad[0]);
        r += (hamiltonian_Pprime(s.phi, c, s.M2) - c.source_phi) * v.val[0];
      }
      if (w_off_ >= 0) {
        double EV[3][3];
        deformation_low(d_, c.g, w_grad(v, w_off_, d_), EV);
        r += contract(d_, s.LW, EV);
        double B[3];
        momentum_source(c, s.phi, B);
        r += lower_dot(d_, c.g, B, v, w_off_);
      }
      return c.sqrt_det * r;
    }
    double r = 0;
    if (has_phi_) r += (c.robin_c * s.phi - c.robin_z) * v.val[0];
    if (w_off_ >= 0) {
      double R[3];
      for (int a = 0; a < d_; ++a) {
        R[a] = -c.robin_Z[a];
        for (int b = 0; b < d_; ++b) R[a] += c.robin_C[a][b] * u.val[w_off_ + b];
      }
      r += lower_dot(d_, c.g, R, v, w_off_);
    }
    return boundary_factor(c, ctx.normal) * r;
  }

  double jacobian(int t, const PointContext& ctx, const FieldValue& u, const FieldValue& w,
                  const FieldValue& v) const {
    const ConstraintPoint c = load(d_, layout_, ctx.coeff);
    const State s = state(c, u, ctx);
    if (t == 0) {
      double r = 0;
      double LX[3][3]{};
      if (w_off_ >= 0) conformal_killing(d_, c.ginv, w_grad(w, w_off_, d_), LX);
      if (has_phi_) {
        const double xi = w.val[0], psi = v.val[0];
        r += contract_grad(d_, c.ginv, w.grad[0], v.grad[0]);
        r += hamiltonian_Pprime_derivative(s.phi, c, s.M2) * xi * psi;
        if (mode_ == Mode::coupled) {
          double LXlow[3][3];
          lower(d_, c.g, LX, LXlow);
          r += -0.25 * std::pow(s.phi, -7) * contract(d_, s.Mup, LXlow) * psi;
        }
      }
      if (w_off_ >= 0) {
        double EV[3][3];
        deformation_low(d_, c.g, w_grad(v, w_off_, d_), EV);
        r += contract(d_, LX, EV);
        if (mode_ == Mode::coupled) {
          // d/dphi of (2/3) phi^6 D^a trK
          double B[3];
          for (int a = 0; a < d_; ++a) {
            B[a] = 0;
            for (int b = 0; b < d_; ++b) B[a] += c.ginv[a][b] * c.dtrK[b];
            B[a] *= 4.0 * std::pow(s.phi, 5) * w.val[0];
          }
          r += lower_dot(d_, c.g, B, v, w_off_);
        }
      }
      return c.sqrt_det * r;
    }
    double r = 0;
    if (has_phi_) r += c.robin_c * w.val[0] * v.val[0];
    if (w_off_ >= 0) {
      double R[3];
      for (int a = 0; a < d_; ++a) {
        R[a] = 0;
        for (int b = 0; b < d_; ++b) R[a] += c.robin_C[a][b] * w.val[w_off_ + b];
      }
      r += lower_dot(d_, c.g, R, v, w_off_);
    }
    return boundary_factor(c, ctx.normal) * r;
  }

  Components strong(int t, const PointContext& ctx, const FieldValue& u) const {
    const ConstraintPoint c = load(d_, layout_, ctx.coeff);
    const State s = state(c, u, ctx);
    Components out{};
    Vec3 n{};
    if (t != 0) n = unit_covector(c, ctx.normal);
    if (has_phi_) {
      if (t == 0) {
        out[0] = hamiltonian_Pprime(s.phi, c, s.M2) - c.source_phi;
      } else {
        double flux = 0;
        for (int a = 0; a < d_; ++a)
          for (int b = 0; b < d_; ++b) flux += n[a] * c.ginv[a][b] * u.grad[0][b];
        out[0] = t == 1 ? flux + c.robin_c * s.phi - c.robin_z : flux;
      }
    }
    if (w_off_ >= 0) {
      if (t == 0) {
        double B[3];
        momentum_source(c, s.phi, B);
        for (int a = 0; a < d_; ++a) out[w_off_ + a] = B[a];
      } else {
        for (int a = 0; a < d_; ++a) {
          double flux = 0;
          for (int b = 0; b < d_; ++b) flux += s.LW[a][b] * n[b];
          if (t == 1) {
            flux -= c.robin_Z[a];
            for (int b = 0; b < d_; ++b) flux += c.robin_C[a][b] * u.val[w_off_ + b];
          }
          out[w_off_ + a] = flux;
        }
      }
    }
    return out;
  }

  Components dirichlet(const CoefficientSet& set, const Vec3& x) const {
    Components out{};
    if (has_phi_) out[0] = set.field(layout_.dirichlet_f).value(x);
    if (w_off_ >= 0)
      for (int a = 0; a < d_; ++a) out[w_off_ + a] = set.field(layout_.dirichlet_F[a]).value(x);
    return out;
  }

 private:
  struct State {
    double phi = 1.0;
    double LW[3][3]{};
    double Mup[3][3]{};
    double M2 = 0.0;
  };

  State state(const ConstraintPoint& c, const FieldValue& u, const PointContext& ctx) const {
    State s;
    if (has_phi_) {
      s.phi = u.val[0];
      if (!(s.phi >= kPhiFloor)) {
        if (ctx.clamps) ctx.clamps->fetch_add(1, std::memory_order_relaxed);
        s.phi = kPhiFloor;
      }
    } else {
      s.phi = std::max(c.phi, kPhiFloor);
    }
    if (w_off_ >= 0) conformal_killing(d_, c.ginv, w_grad(u, w_off_, d_), s.LW);
    raise(d_, c.ginv, c.Ahat, s.Mup);
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) s.Mup[a][b] += s.LW[a][b];
    double Mlow[3][3];
    lower(d_, c.g, s.Mup, Mlow);
    s.M2 = contract(d_, s.Mup, Mlow);
    return s;
  }

  void momentum_source(const ConstraintPoint& c, double phi, double B[3]) const {
    const double p6 = std::pow(phi, 6);
    for (int a = 0; a < d_; ++a) {
      double dK = 0;
      for (int b = 0; b < d_; ++b) dK += c.ginv[a][b] * c.dtrK[b];
      B[a] = (2.0 / 3.0) * p6 * dK + 8.0 * kPi * c.jhat[a] - c.source_W[a];
    }
  }

  /// |n|_{g^-1} for the Euclidean unit normal n.
  double normal_scale(const ConstraintPoint& c, const Vec3& n) const {
    return std::sqrt(contract_grad(d_, c.ginv, n, n));
  }
  double boundary_factor(const ConstraintPoint& c, const Vec3& n) const { return c.sqrt_det * normal_scale(c, n); }
  Vec3 unit_covector(const ConstraintPoint& c, const Vec3& n) const {
    const double s = normal_scale(c, n);
    return {n[0] / s, n[1] / s, n[2] / s};
  }

  int d_;
  Mode mode_;
  Layout layout_;
  bool has_phi_ = true;
  int w_off_ = -1;
};

ProblemDefinition make_problem(int dim, Mode mode, std::shared_ptr<const CoefficientSet> coeffs,
                               const std::string& name) {
  ProblemDefinition pb;
  pb.name = name;
  pb.coefficients = coeffs;
  auto forms = std::make_shared<const ConstraintForms>(dim, mode, *coeffs);
  pb.n_unknowns = forms->components();
  pb.symmetric = mode != Mode::coupled;
  pb.linear = mode == Mode::momentum;
  pb.Ft = [forms](int t, const PointContext& ctx, const FieldValue& u, const FieldValue& v) {
    return forms->residual(t, ctx, u, v);
  };
  pb.DFt = [forms](int t, const PointContext& ctx, const FieldValue& u, const FieldValue& w, const FieldValue& v) {
    return forms->jacobian(t, ctx, u, w, v);
  };
  pb.SFt = [forms](int t, const PointContext& ctx, const FieldValue& u) { return forms->strong(t, ctx, u); };
  pb.dirichlet = [forms, coeffs](const Vec3& x) { return forms->dirichlet(*coeffs, x); };
  // phi = 1, W = 0.
  pb.initial_guess = Components{};
  if (mode != Mode::momentum) (*pb.initial_guess)[0] = 1.0;
  return pb;
}

}  // namespace

const std::vector<std::string>& constraint_coefficient_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"Rhat", "trK", "rho", "robin_c", "robin_z", "dirichlet_f", "phi", "source_phi"};
    for (int a = 0; a < 3; ++a) {
      n.push_back(vec_name("jhat", a));
      n.push_back(vec_name("robin_Z", a));
      n.push_back(vec_name("dirichlet_F", a));
      n.push_back(vec_name("source_W", a));
      for (int b = 0; b < 3; ++b) {
        if (b >= a) {
          n.push_back(sym_name("Ahat", a, b));
          n.push_back(sym_name("metric", a, b));
        }
        n.push_back(mixed_name("robin_C", a, b));
      }
    }
    return n;
  }();
  return names;
}

std::shared_ptr<CoefficientSet> flat_trivial_coefficients() {
  auto set = std::make_shared<CoefficientSet>();
  for (const auto& n : constraint_coefficient_names()) set->set(n, ScalarField::constant(0.0));
  set->set("dirichlet_f", ScalarField::constant(1.0));
  set->set("phi", ScalarField::constant(1.0));
  for (int a = 0; a < 3; ++a) set->set(sym_name("metric", a, a), ScalarField::constant(1.0));
  return set;
}

double hamiltonian_Pprime(double phi, const ConstraintPoint& c, double M2) {
  phi = std::max(phi, kPhiFloor);
  return c.Rhat * phi / 8.0 + c.trK * c.trK * std::pow(phi, 5) / 12.0 - M2 * std::pow(phi, -7) / 8.0 -
         2.0 * kPi * c.rho * std::pow(phi, -3);
}

double hamiltonian_Pprime_derivative(double phi, const ConstraintPoint& c, double M2) {
  phi = std::max(phi, kPhiFloor);
  return c.Rhat / 8.0 + 5.0 / 12.0 * c.trK * c.trK * std::pow(phi, 4) + 7.0 / 8.0 * M2 * std::pow(phi, -8) +
         6.0 * kPi * c.rho * std::pow(phi, -4);
}

void conformal_killing(int d, const double ginv[3][3], const std::array<Vec3, kMaxComponents>& dW, double LW[3][3]) {
  double DW[3][3];  // D^a W^b
  double div = 0;
  for (int a = 0; a < d; ++a) {
    div += dW[a][a];
    for (int b = 0; b < d; ++b) {
      double s = 0;
      for (int c = 0; c < d; ++c) s += ginv[a][c] * dW[b][c];
      DW[a][b] = s;
    }
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) LW[a][b] = DW[a][b] + DW[b][a] - (2.0 / 3.0) * ginv[a][b] * div;
}

ProblemDefinition hamiltonian_forms(int dim, std::shared_ptr<const CoefficientSet> coeffs) {
  return make_problem(dim, Mode::hamiltonian, std::move(coeffs), "hamiltonian");
}

ProblemDefinition momentum_forms(int dim, std::shared_ptr<const CoefficientSet> coeffs) {
  return make_problem(dim, Mode::momentum, std::move(coeffs), "momentum");
}

ProblemDefinition coupled_forms(int dim, std::shared_ptr<const CoefficientSet> coeffs) {
  return make_problem(dim, Mode::coupled, std::move(coeffs), "coupled");
}

void validate_constraint_data(const Mesh& mesh, const CoefficientSet& coeffs) {
  const Layout L(coeffs);
  const int d = mesh.dim();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vertex& vx = mesh.vertex(v);
    const Vec3& x = vx.x;
    if (coeffs.field(L.rho).value(x) < 0) throw ConfigError("coefficient rho is negative at a mesh vertex");
    if (vx.bclass == BoundaryClass::dirichlet && !(coeffs.field(L.dirichlet_f).value(x) > 0))
      throw ConfigError("coefficient dirichlet_f must be positive on the Dirichlet boundary");
    if (vx.bclass == BoundaryClass::neumann && coeffs.field(L.robin_c).value(x) < 0)
      throw ConfigError("coefficient robin_c is negative on the Robin boundary");
    double g[3][3];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        g[a][b] = coeffs.field(L.metric[a][b]).value(x);
      }
    // Leading principal minors.
    const double m1 = g[0][0], m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    bool spd = m1 > 0 && m2 > 0;
    if (d == 3) {
      const double m3 = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                        g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                        g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
      spd = spd && m3 > 0;
    }
    if (!spd) throw ConfigError("coefficient metric is not positive definite at a mesh vertex");
  }
}

Benchmark manufactured_hamiltonian() {
  auto set = flat_trivial_coefficients();
  set->set("trK", ScalarField::constant(std::sqrt(12.0)));
  set->set("rho", ScalarField::constant(1.0));
  set->set("Ahat_xx", ScalarField::constant(0.5));
  set->set("Ahat_yy", ScalarField::constant(-0.5));
  auto phi_star = [](const Vec3& x) { return 1.0 + 0.25 * std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
  ScalarField src;
  src.value = [phi_star](const Vec3& x) {
    ConstraintPoint c;
    c.trK = std::sqrt(12.0);
    c.rho = 1.0;
    const double lap = -0.5 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    return -lap + hamiltonian_Pprime(phi_star(x), c, 0.5);
  };
  src.gradient = [](const Vec3&) { return Vec3{}; };  // unused by the forms
  src.description = "manufactured hamiltonian source";
  set->set("source_phi", src);

  Benchmark b;
  b.problem = hamiltonian_forms(2, set);
  b.problem.name = "manufactured_hamiltonian";
  b.exact.value = [phi_star](const Vec3& x) { return Components{phi_star(x), 0, 0, 0}; };
  b.exact.gradient = [](const Vec3& x) {
    std::array<Vec3, kMaxComponents> g{};
    g[0] = {0.25 * kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
            0.25 * kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]), 0};
    return g;
  };
  b.domain = "unit_square";
  return b;
}

Benchmark manufactured_momentum() {
  auto set = flat_trivial_coefficients();
  // Source s = -(lap W + (1/3) grad div W) for W = (w, 0, 0).
  auto field = [](std::function<double(const Vec3&)> f, const char* desc) {
    ScalarField s;
    s.value = std::move(f);
    s.gradient = [](const Vec3&) { return Vec3{}; };
    s.description = desc;
    return s;
  };
  const double p2 = kPi * kPi;
  set->set("source_W_x", field([p2](const Vec3& x) {
             return 10.0 / 3.0 * p2 * std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
           }, "manufactured momentum source x"));
  set->set("source_W_y", field([p2](const Vec3& x) {
             return -p2 / 3.0 * std::cos(kPi * x[0]) * std::cos(kPi * x[1]) * std::sin(kPi * x[2]);
           }, "manufactured momentum source y"));
  set->set("source_W_z", field([p2](const Vec3& x) {
             return -p2 / 3.0 * std::cos(kPi * x[0]) * std::sin(kPi * x[1]) * std::cos(kPi * x[2]);
           }, "manufactured momentum source z"));

  Benchmark b;
  b.problem = momentum_forms(3, set);
  b.problem.name = "manufactured_momentum";
  b.exact.value = [](const Vec3& x) {
    return Components{std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]), 0, 0, 0};
  };
  b.exact.gradient = [](const Vec3& x) {
    const double sx = std::sin(kPi * x[0]), sy = std::sin(kPi * x[1]), sz = std::sin(kPi * x[2]);
    const double cx = std::cos(kPi * x[0]), cy = std::cos(kPi * x[1]), cz = std::cos(kPi * x[2]);
    std::array<Vec3, kMaxComponents> g{};
    g[0] = {kPi * cx * sy * sz, kPi * sx * cy * sz, kPi * sx * sy * cz};
    return g;
  };
  b.domain = "unit_cube";
  return b;
}

std::shared_ptr<CoefficientSet> two_holes_coefficients(int dim) {
  auto set = flat_trivial_coefficients();
  set->set("trK", ScalarField::constant(0.5));
  // Two matter lumps placed symmetrically about the hole.
  ScalarField rho;
  rho.value = [dim](const Vec3& x) {
    auto bump = [&](double cx) {
      double r2 = (x[0] - cx) * (x[0] - cx) + x[1] * x[1];
      if (dim == 3) r2 += x[2] * x[2];
      return std::exp(-r2 / (2 * 0.1 * 0.1));
    };
    return 0.1 * (bump(-0.6) + bump(0.6));
  };
  rho.description = "two gaussians at x = -0.6, 0.6";
  set->set("rho", rho);
  return set;
}

}  // namespace afem
