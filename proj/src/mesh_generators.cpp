#include <afem/mesh_generators.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace afem {

Mesh build_mesh(int dim, const std::vector<Vec3>& points, const std::vector<std::array<int, 4>>& cells,
                const BoundaryClassifier& classify) {
  Mesh mesh(dim);
  // Drop points no cell references so holes do not leave isolated vertices.
  std::vector<int> used(points.size(), -1);
  for (const auto& c : cells)
    for (int i = 0; i <= dim; ++i) used[c[i]] = 0;
  for (std::size_t p = 0; p < points.size(); ++p)
    if (used[p] == 0) used[p] = mesh.add_vertex(points[p]);

  std::map<std::array<int, 3>, int> face_count;
  auto face_key = [&](const std::array<int, 4>& c, int skip) {
    std::array<int, 3> k{-1, -1, -1};
    int n = 0;
    for (int i = 0; i <= dim; ++i)
      if (i != skip) k[n++] = used[c[i]];
    std::sort(k.begin(), k.begin() + dim);
    return k;
  };
  for (const auto& c : cells)
    for (int f = 0; f <= dim; ++f) ++face_count[face_key(c, f)];

  for (const auto& c : cells) {
    std::array<int, 4> v{};
    std::array<BoundaryClass, 4> flags{};
    for (int i = 0; i <= dim; ++i) v[i] = used[c[i]];
    for (int f = 0; f <= dim; ++f) {
      if (face_count[face_key(c, f)] > 1) continue;
      Vec3 center{0, 0, 0};
      for (int i = 0; i <= dim; ++i)
        if (i != f)
          for (int a = 0; a < 3; ++a) center[a] += mesh.vertex(v[i]).x[a] / dim;
      flags[f] = classify(center);
    }
    mesh.add_simplex(std::span<const int>(v.data(), dim + 1), std::span<const BoundaryClass>(flags.data(), dim + 1));
  }
  mesh.classify_vertices();
  return mesh;
}

namespace {

void push_square_cells(std::vector<std::array<int, 4>>& cells, int v00, int v10, int v01, int v11) {
  cells.push_back({v00, v10, v11, -1});
  cells.push_back({v00, v11, v01, -1});
}

void push_kuhn_cells(std::vector<std::array<int, 4>>& cells, const std::array<int, 8>& corner) {
  // corner index bit a set means +e_a.
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (const auto& p : perms) {
    const int c0 = 0, c1 = 1 << p[0], c2 = c1 | (1 << p[1]), c3 = 7;
    cells.push_back({corner[c0], corner[c1], corner[c2], corner[c3]});
  }
}

}  // namespace

Mesh unit_square(int n, const BoundaryClassifier& classify) {
  std::vector<Vec3> pts;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) pts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0});
  std::vector<std::array<int, 4>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) push_square_cells(cells, id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
  return build_mesh(2, pts, cells, classify);
}

Mesh unit_cube(int n, const BoundaryClassifier& classify) {
  std::vector<Vec3> pts;
  auto id = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        pts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n});
  std::vector<std::array<int, 4>> cells;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::array<int, 8> c{};
        for (int b = 0; b < 8; ++b) c[b] = id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        push_kuhn_cells(cells, c);
      }
  return build_mesh(3, pts, cells, classify);
}

Mesh l_shape(int n, const BoundaryClassifier& classify) {
  const int m = 2 * n;
  std::vector<Vec3> pts;
  auto id = [m](int i, int j) { return j * (m + 1) + i; };
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i)
      pts.push_back({-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m, 0.0});
  std::vector<std::array<int, 4>> cells;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (i >= n && j < n) continue;
      push_square_cells(cells, id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
    }
  return build_mesh(2, pts, cells, classify);
}

Mesh annulus(int n_r, int n_theta, double r_in, double r_out, const BoundaryClassifier& classify) {
  std::vector<Vec3> pts;
  auto id = [n_theta](int i, int j) { return i * n_theta + (j % n_theta); };
  for (int i = 0; i <= n_r; ++i) {
    const double r = r_in + (r_out - r_in) * i / n_r;
    for (int j = 0; j < n_theta; ++j) {
      const double t = 2.0 * std::numbers::pi * j / n_theta;
      pts.push_back({r * std::cos(t), r * std::sin(t), 0.0});
    }
  }
  std::vector<std::array<int, 4>> cells;
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_theta; ++j) push_square_cells(cells, id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
  return build_mesh(2, pts, cells, classify);
}

Mesh sphere_in_box(int n, double r, const BoundaryClassifier& classify) {
  const int m = 2 * n;
  std::vector<Vec3> pts;
  auto id = [m](int i, int j, int k) { return (k * (m + 1) + j) * (m + 1) + i; };
  auto coord = [m](int i) { return -1.0 + 2.0 * i / m; };
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) pts.push_back({coord(i), coord(j), coord(k)});
  std::vector<std::array<int, 4>> cells;
  const double h = 2.0 / m;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double cx = coord(i) + 0.5 * h, cy = coord(j) + 0.5 * h, cz = coord(k) + 0.5 * h;
        if (std::sqrt(cx * cx + cy * cy + cz * cz) < r) continue;
        std::array<int, 8> c{};
        for (int b = 0; b < 8; ++b) c[b] = id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        push_kuhn_cells(cells, c);
      }
  return build_mesh(3, pts, cells, classify);
}

}  // namespace afem
