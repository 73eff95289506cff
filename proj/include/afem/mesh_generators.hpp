#pragma once

#include <afem/mesh.hpp>

#include <functional>
#include <vector>

namespace afem {

/// Boundary class for a boundary face, given its barycenter.
using BoundaryClassifier = std::function<BoundaryClass(const Vec3&)>;

inline BoundaryClassifier all_dirichlet() {
  return [](const Vec3&) { return BoundaryClass::dirichlet; };
}

/// Builds a mesh from raw cells; unmatched faces are boundary faces classified by `classify`.
Mesh build_mesh(int dim, const std::vector<Vec3>& points, const std::vector<std::array<int, 4>>& cells,
                const BoundaryClassifier& classify);

/// [0,1]^2 with n x n cells, two triangles per cell (diagonal (i,j)-(i+1,j+1)).
Mesh unit_square(int n, const BoundaryClassifier& classify = all_dirichlet());
/// [0,1]^3 with n^3 cells, six Kuhn tetrahedra per cell.
Mesh unit_cube(int n, const BoundaryClassifier& classify = all_dirichlet());
/// [-1,1]^2 minus the quadrant x>0, y<0; reentrant corner at the origin. 2n cells per side.
Mesh l_shape(int n, const BoundaryClassifier& classify = all_dirichlet());
/// Annulus r_in <= r <= r_out with n_r radial and n_theta angular cells.
Mesh annulus(int n_r, int n_theta, double r_in, double r_out, const BoundaryClassifier& classify = all_dirichlet());
/// [-1,1]^3 Kuhn grid (2n cells per side) with the cells whose centers lie within r removed.
Mesh sphere_in_box(int n, double r, const BoundaryClassifier& classify = all_dirichlet());

}  // namespace afem
