#pragma once

#include <afem/common.hpp>

#include <vector>

namespace afem {

struct QuadPoint {
  std::array<double, 4> bary{};  // d+1 barycentric coordinates
  double weight = 0.0;           // reference-simplex weight
};

/// Rules on the reference simplex; weights sum to 1/2 (d=2) or 1/6 (d=3).
/// Supported degrees: 1, 2, 5.
const std::vector<QuadPoint>& simplex_rule(int dim, int degree);
/// Rules on the reference face (segment of length 1, or triangle of area 1/2);
/// `bary` holds d face coordinates. Degree 3 in 2D (2-point Gauss), 2 in 3D.
const std::vector<QuadPoint>& face_rule(int dim);

inline double reference_volume(int dim) { return dim == 2 ? 0.5 : 1.0 / 6.0; }
inline double reference_face_measure(int dim) { return dim == 2 ? 1.0 : 0.5; }

struct BasisSample {
  double value = 0.0;
  Vec3 ref_grad{};
};

/// Finite element description. The assembler handles vertex dofs only; the
/// edge/face/interior counts are carried so other elements can be described.
struct ElementDef {
  int dim = 2;
  int dofs_per_vertex = 1;
  int dofs_per_edge = 0;
  int dofs_per_face = 0;
  int dofs_interior = 0;
  std::vector<QuadPoint> quad_points;
  /// basis_vals[q][i]: basis function i at quadrature point q.
  std::vector<std::vector<BasisSample>> basis_vals;

  int num_basis() const { return dofs_per_vertex * (dim + 1); }
};

/// Piecewise-linear Lagrange element with the given quadrature degree.
ElementDef linear_element(int dim, int quad_degree = 2);

}  // namespace afem
