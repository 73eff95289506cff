#pragma once

#include <afem/mesh.hpp>

#include <vector>

namespace afem {

struct Location {
  int simplex = -1;
  std::array<double, 4> bary{};
  bool found() const { return simplex >= 0; }
};

/// Barycentric coordinates of x in simplex s.
std::array<double, 4> barycentric(const Mesh& mesh, int s, const Vec3& x);

/// Uniform bin grid over the live simplices of a mesh snapshot. The mesh must
/// outlive the locator and must not be refined while it is in use.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh, double tol = 1e-10);

  /// Lowest-id simplex containing x (barycentrics >= -tol), or not found.
  Location locate(const Vec3& x) const;

 private:
  int bin_index(const Vec3& x, int axis) const;

  const Mesh& mesh_;
  double tol_;
  Vec3 lo_{}, hi_{};
  std::array<int, 3> n_{1, 1, 1};
  std::vector<std::vector<int>> bins_;
};

}  // namespace afem
