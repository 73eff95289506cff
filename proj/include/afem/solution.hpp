#pragma once

#include <afem/mesh.hpp>
#include <afem/problem.hpp>

#include <optional>
#include <vector>

namespace afem {

/// Nodal P1 field, components interleaved per vertex. A field is tied to a
/// mesh by vertex count; since vertex ids are stable under refinement a field
/// can be extended to a refined mesh with `prolongate`.
struct SolutionField {
  int ncomp = 1;
  std::vector<double> values;

  SolutionField() = default;
  SolutionField(int n_vertices, int n_components, double fill = 0.0)
      : ncomp(n_components), values(static_cast<std::size_t>(n_vertices) * n_components, fill) {}

  int num_vertices() const { return ncomp == 0 ? 0 : static_cast<int>(values.size()) / ncomp; }
  double& at(int v, int c) { return values[static_cast<std::size_t>(v) * ncomp + c]; }
  double at(int v, int c) const { return values[static_cast<std::size_t>(v) * ncomp + c]; }
};

/// Field filled with `fill` (default: the problem's initial guess) and Dirichlet
/// vertices set to the boundary data.
SolutionField initial_field(const Mesh& mesh, const ProblemDefinition& problem, std::optional<double> fill = {});
/// Overwrites Dirichlet vertex values with the problem's boundary data.
void apply_dirichlet(const Mesh& mesh, const ProblemDefinition& problem, SolutionField& u);
/// Nodal interpolant of f.
SolutionField interpolate(const Mesh& mesh, int ncomp, const VectorFunction& f);

/// Extends u to all vertices of `mesh` by linear interpolation along bisected
/// edges (exact for P1 fields under bisection refinement).
void prolongate(const Mesh& mesh, SolutionField& u);

/// Value/gradient of u inside simplex s at barycentric coordinates `bary`.
FieldValue evaluate(const Mesh& mesh, const SolutionField& u, int s, const std::array<double, 4>& bary);

/// Gradients of the barycentric coordinates of simplex s (constant on s).
std::array<Vec3, 4> barycentric_gradients(const Mesh& mesh, int s);

/// Dof mask: true where the vertex is Dirichlet (all components constrained).
std::vector<char> dirichlet_mask(const Mesh& mesh, int ncomp);

}  // namespace afem
