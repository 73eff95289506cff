#include <afem/mesh.hpp>

#include <algorithm>
#include <limits>

namespace afem {

namespace {

double ring_min_quality(const Mesh& mesh, int v) {
  double q = std::numeric_limits<double>::infinity();
  for (int s : mesh.vertex(v).ring) q = std::min(q, shape_measure(mesh, s));
  return q;
}

double global_min_quality(const Mesh& mesh, std::vector<int>* inverted) {
  double q = std::numeric_limits<double>::infinity();
  for (int s : mesh.live_simplices()) {
    const double eta = shape_measure(mesh, s);
    q = std::min(q, eta);
    if (inverted && eta <= 0.0) inverted->push_back(s);
  }
  return q;
}

}  // namespace

SmoothingReport smooth(Mesh& mesh, int iterations) {
  SmoothingReport rep;
  rep.min_quality_before = global_min_quality(mesh, &rep.inverted_before);
  const int d = mesh.dim();
  for (int sweep = 0; sweep < iterations; ++sweep) {
    ++rep.sweeps;
    int moved = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Vertex& vx = mesh.vertex(v);
      if (vx.bclass != BoundaryClass::interior || vx.ring.empty()) continue;
      std::vector<int> nbrs;
      for (int s : vx.ring)
        for (int i = 0; i <= d; ++i)
          if (mesh.simplex(s).verts[i] != v) nbrs.push_back(mesh.simplex(s).verts[i]);
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
      Vec3 centroid{0, 0, 0};
      for (int w : nbrs)
        for (int a = 0; a < 3; ++a) centroid[a] += mesh.vertex(w).x[a] / static_cast<double>(nbrs.size());

      const Vec3 origin = vx.x;
      const double before = ring_min_quality(mesh, v);
      bool accepted = false;
      for (double step : {1.0, 0.5, 0.25, 0.125}) {
        Vec3 trial{};
        for (int a = 0; a < 3; ++a) trial[a] = origin[a] + step * (centroid[a] - origin[a]);
        if (trial == origin) break;
        mesh.move_vertex(v, trial);
        const double after = ring_min_quality(mesh, v);
        if (after > before + 1e-14 * std::max(1.0, std::abs(before))) {
          accepted = true;
          break;
        }
      }
      if (accepted) {
        ++moved;
      } else {
        mesh.move_vertex(v, origin);
      }
    }
    rep.accepted_moves += moved;
    if (moved == 0) break;
  }
  rep.min_quality_after = global_min_quality(mesh, &rep.inverted_after);
  return rep;
}

}  // namespace afem
