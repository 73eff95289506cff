#include <afem/solution.hpp>

#include <string>

namespace afem {

std::array<Vec3, 4> barycentric_gradients(const Mesh& mesh, int s) {
  const int d = mesh.dim();
  std::array<Vec3, 4> g{};
  const Vec3 p0 = mesh.point(s, 0);
  if (d == 2) {
    const Vec3 a = sub3(mesh.point(s, 1), p0), b = sub3(mesh.point(s, 2), p0);
    const double det = a[0] * b[1] - a[1] * b[0];
    g[1] = {b[1] / det, -b[0] / det, 0.0};
    g[2] = {-a[1] / det, a[0] / det, 0.0};
  } else {
    const Vec3 a = sub3(mesh.point(s, 1), p0), b = sub3(mesh.point(s, 2), p0), c = sub3(mesh.point(s, 3), p0);
    auto cross = [](const Vec3& u, const Vec3& v) {
      return Vec3{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    };
    const Vec3 bc = cross(b, c), ca = cross(c, a), ab = cross(a, b);
    const double det = dot3(a, bc);
    for (int k = 0; k < 3; ++k) {
      g[1][k] = bc[k] / det;
      g[2][k] = ca[k] / det;
      g[3][k] = ab[k] / det;
    }
  }
  for (int i = 1; i <= d; ++i)
    for (int k = 0; k < 3; ++k) g[0][k] -= g[i][k];
  return g;
}

std::vector<char> dirichlet_mask(const Mesh& mesh, int ncomp) {
  std::vector<char> m(static_cast<std::size_t>(mesh.num_vertices()) * ncomp, 0);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.vertex(v).bclass == BoundaryClass::dirichlet)
      for (int c = 0; c < ncomp; ++c) m[static_cast<std::size_t>(v) * ncomp + c] = 1;
  return m;
}

void apply_dirichlet(const Mesh& mesh, const ProblemDefinition& problem, SolutionField& u) {
  if (u.num_vertices() != mesh.num_vertices() || u.ncomp != problem.n_unknowns)
    throw AssemblyError("apply_dirichlet: field size does not match mesh/problem");
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.vertex(v).bclass != BoundaryClass::dirichlet) continue;
    const Components g = problem.dirichlet ? problem.dirichlet(mesh.vertex(v).x) : Components{};
    for (int c = 0; c < u.ncomp; ++c) u.at(v, c) = g[c];
  }
}

SolutionField initial_field(const Mesh& mesh, const ProblemDefinition& problem, std::optional<double> fill) {
  SolutionField u(mesh.num_vertices(), problem.n_unknowns, fill.value_or(0.0));
  if (!fill && problem.initial_guess)
    for (int v = 0; v < u.num_vertices(); ++v)
      for (int c = 0; c < u.ncomp; ++c) u.at(v, c) = (*problem.initial_guess)[c];
  apply_dirichlet(mesh, problem, u);
  return u;
}

SolutionField interpolate(const Mesh& mesh, int ncomp, const VectorFunction& f) {
  SolutionField u(mesh.num_vertices(), ncomp);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Components val = f(mesh.vertex(v).x);
    for (int c = 0; c < ncomp; ++c) u.at(v, c) = val[c];
  }
  return u;
}

void prolongate(const Mesh& mesh, SolutionField& u) {
  const int old_n = u.num_vertices();
  if (old_n > mesh.num_vertices()) throw AssemblyError("prolongate: field has more vertices than the mesh");
  u.values.resize(static_cast<std::size_t>(mesh.num_vertices()) * u.ncomp, 0.0);
  for (int v = old_n; v < mesh.num_vertices(); ++v) {
    const auto& par = mesh.vertex(v).parents;
    if (par[0] < 0 || par[0] >= v || par[1] >= v)
      throw AssemblyError("prolongate: vertex " + std::to_string(v) + " has no bisection parents");
    for (int c = 0; c < u.ncomp; ++c) u.at(v, c) = 0.5 * (u.at(par[0], c) + u.at(par[1], c));
  }
}

FieldValue evaluate(const Mesh& mesh, const SolutionField& u, int s, const std::array<double, 4>& bary) {
  FieldValue f;
  const auto g = barycentric_gradients(mesh, s);
  const auto& sx = mesh.simplex(s);
  for (int i = 0; i <= mesh.dim(); ++i) {
    const int v = sx.verts[i];
    for (int c = 0; c < u.ncomp; ++c) {
      const double uv = u.at(v, c);
      f.val[c] += bary[i] * uv;
      for (int k = 0; k < 3; ++k) f.grad[c][k] += g[i][k] * uv;
    }
  }
  return f;
}

}  // namespace afem
