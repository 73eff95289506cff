#include <afem/benchmarks.hpp>

#include <afem/quadrature.hpp>

#include <cmath>
#include <numbers>

namespace afem {

namespace {

constexpr double kPi = std::numbers::pi;

double grad_dot(const FieldValue& a, const FieldValue& b) { return dot3(a.grad[0], b.grad[0]); }

}  // namespace

ProblemDefinition poisson(std::function<double(const Vec3&)> f, std::function<double(const Vec3&)> g,
                          std::function<double(const Vec3&)> h) {
  ProblemDefinition pb;
  pb.name = "poisson";
  pb.n_unknowns = 1;
  pb.symmetric = true;
  pb.linear = true;
  pb.Ft = [f, h](int t, const PointContext& ctx, const FieldValue& u, const FieldValue& v) {
    if (t == 0) return grad_dot(u, v) - (f ? f(ctx.x) : 0.0) * v.val[0];
    return -(h ? h(ctx.x) : 0.0) * v.val[0];
  };
  pb.DFt = [](int t, const PointContext&, const FieldValue&, const FieldValue& w, const FieldValue& v) {
    return t == 0 ? grad_dot(w, v) : 0.0;
  };
  pb.SFt = [f, h](int t, const PointContext& ctx, const FieldValue& u) {
    Components r{};
    const double flux = dot3(u.grad[0], ctx.normal);
    if (t == 0) r[0] = -(f ? f(ctx.x) : 0.0);
    else if (t == 1) r[0] = flux - (h ? h(ctx.x) : 0.0);
    else r[0] = flux;
    return r;
  };
  pb.dirichlet = [g](const Vec3& x) {
    Components c{};
    c[0] = g ? g(x) : 0.0;
    return c;
  };
  return pb;
}

Benchmark benchmark_poisson(const std::string& variant) {
  Benchmark b;
  if (variant == "square_sine") {
    auto u = [](const Vec3& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
    b.problem = poisson([u](const Vec3& x) { return 2 * kPi * kPi * u(x); }, nullptr);
    b.exact.value = [u](const Vec3& x) { return Components{u(x), 0, 0, 0}; };
    b.exact.gradient = [](const Vec3& x) {
      std::array<Vec3, kMaxComponents> g{};
      g[0] = {kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]), kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]), 0};
      return g;
    };
    b.domain = "unit_square";
  } else if (variant == "cube_sine") {
    auto u = [](const Vec3& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]); };
    b.problem = poisson([u](const Vec3& x) { return 3 * kPi * kPi * u(x); }, nullptr);
    b.exact.value = [u](const Vec3& x) { return Components{u(x), 0, 0, 0}; };
    b.exact.gradient = [](const Vec3& x) {
      const double sx = std::sin(kPi * x[0]), sy = std::sin(kPi * x[1]), sz = std::sin(kPi * x[2]);
      const double cx = std::cos(kPi * x[0]), cy = std::cos(kPi * x[1]), cz = std::cos(kPi * x[2]);
      std::array<Vec3, kMaxComponents> g{};
      g[0] = {kPi * cx * sy * sz, kPi * sx * cy * sz, kPi * sx * sy * cz};
      return g;
    };
    b.domain = "unit_cube";
  } else if (variant == "corner_singularity") {
    // Reentrant corner at the origin; theta in [0, 3 pi / 2] over the L-shape.
    auto polar = [](const Vec3& x) {
      double th = std::atan2(x[1], x[0]);
      if (th < 0) th += 2 * kPi;
      return std::pair<double, double>{std::hypot(x[0], x[1]), th};
    };
    auto u = [polar](const Vec3& x) {
      const auto [r, th] = polar(x);
      return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * th / 3.0);
    };
    b.problem = poisson(nullptr, u);
    b.exact.value = [u](const Vec3& x) { return Components{u(x), 0, 0, 0}; };
    b.exact.gradient = [polar](const Vec3& x) {
      std::array<Vec3, kMaxComponents> g{};
      const auto [r, th] = polar(x);
      if (r == 0.0) return g;
      // du/dr = (2/3) r^(-1/3) sin(2t/3), (1/r) du/dt = (2/3) r^(-1/3) cos(2t/3)
      const double a = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0);
      const double ur = a * std::sin(2 * th / 3), ut = a * std::cos(2 * th / 3);
      g[0] = {ur * std::cos(th) - ut * std::sin(th), ur * std::sin(th) + ut * std::cos(th), 0};
      return g;
    };
    b.domain = "l_shape";
  } else {
    throw Error("unknown benchmark variant '" + variant + "' (square_sine, cube_sine, corner_singularity)");
  }
  b.problem.name = variant;
  return b;
}

ProblemDefinition bratu(double lambda, std::function<double(const Vec3&)> source) {
  ProblemDefinition pb;
  pb.name = "bratu";
  pb.n_unknowns = 1;
  pb.symmetric = true;
  pb.Ft = [lambda, source](int t, const PointContext& ctx, const FieldValue& u, const FieldValue& v) {
    if (t != 0) return 0.0;
    return grad_dot(u, v) - (lambda * std::exp(u.val[0]) + (source ? source(ctx.x) : 0.0)) * v.val[0];
  };
  pb.DFt = [lambda](int t, const PointContext&, const FieldValue& u, const FieldValue& w, const FieldValue& v) {
    if (t != 0) return 0.0;
    return grad_dot(w, v) - lambda * std::exp(u.val[0]) * w.val[0] * v.val[0];
  };
  pb.SFt = [lambda, source](int t, const PointContext& ctx, const FieldValue& u) {
    Components r{};
    if (t == 0) r[0] = -(lambda * std::exp(u.val[0]) + (source ? source(ctx.x) : 0.0));
    else r[0] = dot3(u.grad[0], ctx.normal);
    return r;
  };
  pb.dirichlet = [](const Vec3&) { return Components{}; };
  return pb;
}

ErrorNorms measure_error(const Mesh& mesh, const SolutionField& u, const ExactSolution& exact, int quad_degree) {
  const int d = mesh.dim();
  const auto& rule = simplex_rule(d, quad_degree);
  double l2 = 0.0, h1 = 0.0;
  for (int s : mesh.live_simplices()) {
    const double scale = mesh.volume(s) / reference_volume(d);
    for (const auto& q : rule) {
      Vec3 x{0, 0, 0};
      for (int i = 0; i <= d; ++i)
        for (int a = 0; a < 3; ++a) x[a] += q.bary[i] * mesh.point(s, i)[a];
      const FieldValue uh = evaluate(mesh, u, s, q.bary);
      const Components ev = exact.value(x);
      const auto eg = exact.gradient ? exact.gradient(x) : std::array<Vec3, kMaxComponents>{};
      for (int c = 0; c < u.ncomp; ++c) {
        const double e = uh.val[c] - ev[c];
        l2 += q.weight * scale * e * e;
        const Vec3 ge = sub3(uh.grad[c], eg[c]);
        h1 += q.weight * scale * dot3(ge, ge);
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace afem
